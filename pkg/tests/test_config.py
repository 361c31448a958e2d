"""Spec grammar: parsing, coercion, aliases, grids, guard rails."""

import pytest

from deepgnn.config import (ExperimentSpec, TrainConfig, TrickConfig,
                            format_spec, parse_spec_file, parse_spec_text,
                            set_option)
from deepgnn.errors import ConfigError

SPEC = """\
# sweet point plus a skip trick
dataset = cora
reps = 5
seed_base = 3
trick.backbone = gcn
trick.depth = 32
trick.hidden_dim = 64
trick.skip.mode = initial
trick.skip.alpha = 0.2
trick.drop.feature_dropout = 0.6   # inline comment
train.lr = 0.005
train.weight_decay = 5e-4
"""


def test_parse_basic():
    spec = parse_spec_text(SPEC)
    assert spec.dataset == "cora"
    assert spec.repetitions == 5
    assert spec.seed_base == 3
    assert spec.trick.depth == 32
    assert spec.trick.skip.mode == "initial"
    assert spec.trick.skip.alpha == 0.2
    assert spec.trick.drop.feature_dropout == 0.6
    assert spec.train.lr == 0.005
    assert spec.train.weight_decay == 5e-4


def test_parse_file(tmp_path):
    p = tmp_path / "exp.spec"
    p.write_text(SPEC)
    assert parse_spec_file(p).dataset == "cora"


def test_unknown_key_reports_line_number():
    with pytest.raises(ConfigError, match=r"line 2.*trick\.dephts"):
        parse_spec_text("dataset = cora\ntrick.dephts = 3\n")


def test_missing_equals_reports_line_number():
    with pytest.raises(ConfigError, match="line 1"):
        parse_spec_text("dataset cora\n")


def test_type_errors_are_named():
    with pytest.raises(ConfigError, match="integer"):
        parse_spec_text("dataset = cora\ntrick.depth = deep\n")
    with pytest.raises(ConfigError, match="number"):
        parse_spec_text("dataset = cora\ntrain.lr = fast\n")
    with pytest.raises(ConfigError, match="boolean"):
        parse_spec_text("dataset = cora\ntrick.identity_mapping = maybe\n")


def test_grid_axes():
    spec = parse_spec_text(
        "dataset = cora\n"
        "grid.trick.depth = 2, 16, 32\n"
        "grid.train.lr = 0.01, 0.005\n")
    assert spec.grid == {"trick.depth": [2, 16, 32], "train.lr": [0.01, 0.005]}


def test_grid_three_axes_rejected():
    with pytest.raises(ConfigError, match="at most 2"):
        parse_spec_text(
            "dataset = cora\n"
            "grid.trick.depth = 2, 16\n"
            "grid.train.lr = 0.01\n"
            "grid.trick.hidden_dim = 64, 128\n")


def test_grid_unknown_target():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_spec_text("dataset = cora\ngrid.trick.depht = 2, 4\n")


def test_com_requires_dense_or_jumping():
    with pytest.raises(ConfigError, match="com"):
        parse_spec_text("dataset = cora\ntrick.skip.com = maxpool\n")
    # fine when the mode line comes later in the file
    spec = parse_spec_text(
        "dataset = cora\n"
        "trick.skip.com = maxpool\n"
        "trick.skip.mode = jumping\n")
    assert spec.trick.skip.com == "maxpool"


def test_reps_alias():
    spec = parse_spec_text("dataset = cora\nreps = 7\n")
    assert spec.repetitions == 7


def test_weight_decay_out_none_and_value():
    spec = parse_spec_text("dataset = cora\ntrain.weight_decay_out = none\n")
    assert spec.train.weight_decay_out is None
    spec = parse_spec_text("dataset = cora\ntrain.weight_decay_out = 0.001\n")
    assert spec.train.weight_decay_out == 0.001


def test_missing_dataset_rejected():
    with pytest.raises(ConfigError, match="dataset"):
        parse_spec_text("trick.depth = 2\n")


def test_com_search_guard():
    with pytest.raises(ConfigError, match="com_search"):
        parse_spec_text("dataset = cora\ncom_search = true\n")
    spec = parse_spec_text(
        "dataset = cora\ntrick.skip.mode = dense\ncom_search = true\n")
    assert spec.com_search


def test_format_parse_round_trip():
    spec = parse_spec_text(
        "dataset = pubmed\n"
        "trick.backbone = sgc\n"
        "trick.depth = 16\n"
        "trick.skip.mode = jumping\n"
        "trick.skip.com = attention\n"
        "trick.norm.kind = group\n"
        "trick.norm.groups = 5\n"
        "trick.norm.skip_weight = 0.01\n"
        "train.weight_decay_out = 0.0005\n"
        "grid.trick.depth = 2, 16, 32\n")
    again = parse_spec_text(format_spec(spec))
    assert again.to_dict() == spec.to_dict()


def test_set_option_mutates_in_place():
    spec = ExperimentSpec(dataset="cora")
    set_option(spec, "trick.depth", "16")
    assert spec.trick.depth == 16
    with pytest.raises(ConfigError, match="unknown config key"):
        set_option(spec, "trick.nope", "1")


def test_copy_is_deep_for_nested_configs():
    spec = ExperimentSpec(dataset="cora", trick=TrickConfig(), train=TrainConfig())
    dup = spec.copy()
    dup.trick.skip.alpha = 0.9
    dup.grid["trick.depth"] = [2]
    assert spec.trick.skip.alpha != 0.9
    assert spec.grid == {}


def test_validate_checks_nested():
    spec = ExperimentSpec(dataset="cora")
    spec.trick.depth = 0
    with pytest.raises(ConfigError, match="depth"):
        spec.validate()
    spec = ExperimentSpec(dataset="cora")
    spec.train.label_smoothing = 1.0
    with pytest.raises(ConfigError, match="label_smoothing"):
        spec.validate()


def test_idmap_requires_gcn():
    spec = ExperimentSpec(dataset="cora")
    spec.trick.backbone = "sgc"
    spec.trick.identity_mapping = True
    with pytest.raises(ConfigError, match="gcn"):
        spec.validate()
