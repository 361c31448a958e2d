"""Planetoid converter tests on synthetic distributions, plus count checks
against the real downloads when they are available locally."""

import hashlib
import json
import os
import warnings

import numpy as np
import pytest

from gnnconvert import ConvertError, CountDivergenceWarning, convert_planetoid
from gnnconvert.planetoid import detect_names
from _synth import make_planetoid_files

REAL_DIR = os.environ.get("GNNCONVERT_PLANETOID_DIR")


def _read_meta(out):
    with open(os.path.join(out, "meta.json")) as f:
        return json.load(f)


def _read_splits(out):
    with open(os.path.join(out, "splits.json")) as f:
        return json.load(f)


def _read_edges(out, meta):
    edges = np.fromfile(os.path.join(out, "edges.bin"), dtype="<u4")
    return edges.reshape(meta["num_edges"], 2).astype(np.int64)


def _read_features(out, meta):
    feats = np.fromfile(os.path.join(out, "features.bin"), dtype="<f4")
    return feats.reshape(meta["n"], meta["d"])


class TestSynthetic:
    def test_summary_and_meta(self, planetoid_dir, tmp_path):
        src, truth = planetoid_dir
        out = tmp_path / "out"
        summary = convert_planetoid(src, "toy", out)
        assert summary["n"] == truth["n"]
        assert summary["d"] == truth["d"]
        assert summary["num_classes"] == truth["num_classes"]
        assert summary["num_edges"] == truth["num_edges"]
        meta = _read_meta(out)
        assert meta["name"] == "toy"
        assert meta["n"] == truth["n"]
        assert meta["num_edges"] == truth["num_edges"]
        for fname in ("edges.bin", "features.bin", "labels.bin", "splits.json"):
            assert os.path.isfile(out / fname)
            assert fname in meta["checksums"]

    def test_features_reordered_to_node_ids(self, planetoid_dir, tmp_path):
        # tx rows arrive in shuffled file order; each must land at its id
        src, truth = planetoid_dir
        out = tmp_path / "out"
        convert_planetoid(src, "toy", out)
        feats = _read_features(out, _read_meta(out))
        np.testing.assert_array_equal(feats, truth["features"])
        labels = np.fromfile(out / "labels.bin", dtype="<u2")
        np.testing.assert_array_equal(labels, truth["labels"])

    def test_standard_splits(self, planetoid_dir, tmp_path):
        src, truth = planetoid_dir
        out = tmp_path / "out"
        convert_planetoid(src, "toy", out)
        splits = _read_splits(out)
        n_train = truth["n_train"]
        assert splits["train"] == list(range(n_train))
        assert splits["val"] == list(range(n_train, n_train + 500))
        assert splits["test"] == truth["test_ids"].tolist()

    def test_edges_canonical(self, planetoid_dir, tmp_path):
        src, truth = planetoid_dir
        out = tmp_path / "out"
        convert_planetoid(src, "toy", out)
        edges = _read_edges(out, _read_meta(out))
        assert (edges[:, 0] < edges[:, 1]).all()
        # lexicographic and duplicate-free
        keys = edges[:, 0] * truth["n"] + edges[:, 1]
        assert (np.diff(keys) > 0).all()
        assert edges.shape[0] == truth["num_edges"]

    def test_gap_fill(self, tmp_path):
        src = tmp_path / "src"
        src.mkdir()
        truth = make_planetoid_files(src, "gappy", gaps=(2, 5, 6), seed=3)
        out = tmp_path / "out"
        summary = convert_planetoid(src, "gappy", out)
        assert summary["n"] == truth["n"]
        meta = _read_meta(out)
        feats = _read_features(out, meta)
        labels = np.fromfile(out / "labels.bin", dtype="<u2")
        for gid in truth["gap_ids"]:
            assert (feats[gid] == 0).all()
            assert labels[gid] == 0
        live = np.setdiff1d(np.arange(truth["n"]), truth["gap_ids"])
        np.testing.assert_array_equal(feats[live], truth["features"][live])
        # gap nodes belong to no split
        splits = _read_splits(out)
        members = set(splits["train"]) | set(splits["val"]) | set(splits["test"])
        assert members.isdisjoint(truth["gap_ids"].tolist())

    def test_deterministic_bytes(self, planetoid_dir, tmp_path):
        src, _ = planetoid_dir
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        convert_planetoid(src, "toy", out_a)
        convert_planetoid(src, "toy", out_b)
        for fname in ("meta.json", "edges.bin", "features.bin",
                      "labels.bin", "splits.json"):
            a = hashlib.sha256((out_a / fname).read_bytes()).hexdigest()
            b = hashlib.sha256((out_b / fname).read_bytes()).hexdigest()
            assert a == b, fname

    def test_missing_source_file(self, planetoid_dir, tmp_path):
        src, _ = planetoid_dir
        os.remove(os.path.join(src, "ind.toy.ally"))
        with pytest.raises(ConvertError, match="ind.toy.ally"):
            convert_planetoid(src, "toy", tmp_path / "out")

    def test_refuses_nonempty_out(self, planetoid_dir, tmp_path):
        src, _ = planetoid_dir
        out = tmp_path / "out"
        out.mkdir()
        (out / "keep.txt").write_text("x")
        with pytest.raises(ConvertError, match="not empty"):
            convert_planetoid(src, "toy", out)
        convert_planetoid(src, "toy", out, force=True)
        assert os.path.isfile(out / "meta.json")

    def test_count_divergence_warns_with_both_counts(self, tmp_path):
        src = tmp_path / "src"
        src.mkdir()
        truth = make_planetoid_files(src, "cora", seed=1)
        with pytest.warns(CountDivergenceWarning) as caught:
            convert_planetoid(src, "cora", tmp_path / "out")
        text = " ".join(str(w.message) for w in caught)
        assert "2708" in text and str(truth["n"]) in text

    def test_unknown_name_never_warns(self, planetoid_dir, tmp_path):
        src, _ = planetoid_dir
        with warnings.catch_warnings():
            warnings.simplefilter("error", CountDivergenceWarning)
            convert_planetoid(src, "toy", tmp_path / "out")

    def test_detect_names(self, tmp_path):
        make_planetoid_files(tmp_path, "alpha")
        make_planetoid_files(tmp_path, "beta", seed=2)
        assert detect_names(tmp_path) == ["alpha", "beta"]


needs_real = pytest.mark.skipif(
    not (REAL_DIR and os.path.isfile(os.path.join(REAL_DIR or "", "ind.cora.x"))),
    reason="set GNNCONVERT_PLANETOID_DIR to a directory with the ind.* downloads")


@needs_real
@pytest.mark.parametrize("name,n,d,classes", [
    ("cora", 2708, 1433, 7),
    ("citeseer", 3327, 3703, 6),
    ("pubmed", 19717, 500, 3),
])
def test_real_dataset_counts(tmp_path, name, n, d, classes):
    summary = convert_planetoid(REAL_DIR, name, tmp_path / name)
    assert summary["n"] == n
    assert summary["d"] == d
    assert summary["num_classes"] == classes
