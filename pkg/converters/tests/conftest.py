import pytest

from _synth import make_planetoid_files


@pytest.fixture
def planetoid_dir(tmp_path):
    truth = make_planetoid_files(tmp_path, "toy")
    return tmp_path, truth
