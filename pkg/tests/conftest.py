import numpy as np
import pytest

from deepgnn.data import generate_sbm

from _report import acceptance_report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_report:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_report:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def tiny_sbm():
    """120-node 3-block SBM, separable but not trivial; shared by trainer tests."""
    return generate_sbm(blocks=3, per_block=40, p_in=0.15, p_out=0.01,
                        feat_dim=8, noise=0.8, seed=5)


@pytest.fixture()
def np_rng():
    return np.random.default_rng(0)
