"""Canonical dataset directory format, loader/storer, and the SBM generator.

A dataset directory holds:

    meta.json      {"name", "n", "d", "num_classes", "num_edges", "checksums"}
    edges.bin      little-endian uint32 pairs, one direction per undirected edge
    features.bin   little-endian float32, row major, n x d
    labels.bin     little-endian uint16, length n
    splits.json    {"train": [...], "val": [...], "test": [...]}

checksums maps each binary/splits file to its sha256 hex digest; the loader
verifies them before parsing.  Features are float64 in memory.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .graph import CsrGraph
from .rng import Rng

_CHECKED_FILES = ("edges.bin", "features.bin", "labels.bin", "splits.json")


@dataclass
class Dataset:
    name: str
    graph: CsrGraph
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray    # (n,) int64
    splits: dict          # train/val/test -> int64 index arrays
    num_classes: int

    @property
    def n(self) -> int:
        return self.graph.n

    def validate(self):
        n = self.graph.n
        if self.features.shape[0] != n:
            raise DataFormatError(
                f"features have {self.features.shape[0]} rows for {n} nodes")
        if self.labels.shape != (n,):
            raise DataFormatError(f"labels shape {self.labels.shape}, expected ({n},)")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise DataFormatError(
                f"labels must lie in [0, {self.num_classes}), found "
                f"[{self.labels.min()}, {self.labels.max()}]")
        seen = np.zeros(n, dtype=bool)
        for part in ("train", "val", "test"):
            if part not in self.splits:
                raise DataFormatError(f"missing split {part!r}")
            idx = self.splits[part]
            if idx.size == 0:
                raise DataFormatError(f"split {part!r} is empty")
            if idx.min() < 0 or idx.max() >= n:
                raise DataFormatError(f"split {part!r} has out-of-range indices")
            if np.unique(idx).size != idx.size:
                raise DataFormatError(f"split {part!r} has duplicate indices")
            if seen[idx].any():
                raise DataFormatError(f"split {part!r} overlaps another split")
            seen[idx] = True
        train_classes = np.unique(self.labels[self.splits["train"]])
        if train_classes.size != self.num_classes:
            missing = sorted(set(range(self.num_classes)) - set(train_classes.tolist()))
            raise DataFormatError(f"classes {missing} never appear in the train split")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_dataset(path) -> Dataset:
    """Read, checksum-verify, and validate a canonical dataset directory."""
    meta_path = os.path.join(path, "meta.json")
    if not os.path.isfile(meta_path):
        raise DataFormatError(f"no meta.json under {path}")
    with open(meta_path, "r", encoding="utf-8") as f:
        meta = json.load(f)
    for key in ("name", "n", "d", "num_classes", "num_edges", "checksums"):
        if key not in meta:
            raise DataFormatError(f"meta.json is missing {key!r}")
    n, d = int(meta["n"]), int(meta["d"])
    num_edges = int(meta["num_edges"])

    for fname in _CHECKED_FILES:
        fpath = os.path.join(path, fname)
        if not os.path.isfile(fpath):
            raise DataFormatError(f"missing {fname}")
        want = meta["checksums"].get(fname)
        if want is None:
            raise DataFormatError(f"meta.json has no checksum for {fname}")
        got = _sha256(fpath)
        if got != want:
            raise DataFormatError(f"checksum mismatch for {fname}")

    edges = np.fromfile(os.path.join(path, "edges.bin"), dtype="<u4")
    if edges.size != 2 * num_edges:
        raise DataFormatError(
            f"edges.bin holds {edges.size} u32 values, expected {2 * num_edges}")
    edges = edges.reshape(num_edges, 2).astype(np.int64)

    feats = np.fromfile(os.path.join(path, "features.bin"), dtype="<f4")
    if feats.size != n * d:
        raise DataFormatError(f"features.bin holds {feats.size} f32 values, expected {n * d}")
    feats = feats.reshape(n, d).astype(np.float64)

    labels = np.fromfile(os.path.join(path, "labels.bin"), dtype="<u2")
    if labels.size != n:
        raise DataFormatError(f"labels.bin holds {labels.size} u16 values, expected {n}")
    labels = labels.astype(np.int64)

    with open(os.path.join(path, "splits.json"), "r", encoding="utf-8") as f:
        raw_splits = json.load(f)
    splits = {k: np.asarray(v, dtype=np.int64) for k, v in raw_splits.items()}

    graph = CsrGraph.from_edges(n, edges[:, 0], edges[:, 1], undirected=True)
    ds = Dataset(name=str(meta["name"]), graph=graph, features=feats, labels=labels,
                 splits=splits, num_classes=int(meta["num_classes"]))
    ds.validate()
    return ds


def store_dataset(ds: Dataset, path) -> None:
    """Write a dataset in canonical form (deterministic bytes)."""
    os.makedirs(path, exist_ok=True)
    rows = ds.graph.rows_expanded()
    upper = rows < ds.graph.col_idx
    edges = np.stack([rows[upper], ds.graph.col_idx[upper]], axis=1)
    # CSR order of the upper triangle is already (i, j) lexicographic
    edges.astype("<u4").tofile(os.path.join(path, "edges.bin"))
    ds.features.astype("<f4").tofile(os.path.join(path, "features.bin"))
    ds.labels.astype("<u2").tofile(os.path.join(path, "labels.bin"))
    with open(os.path.join(path, "splits.json"), "w", encoding="utf-8") as f:
        json.dump({k: sorted(int(i) for i in v) for k, v in ds.splits.items()},
                  f, indent=2, sort_keys=True)
        f.write("\n")
    meta = {
        "name": ds.name,
        "n": int(ds.n),
        "d": int(ds.features.shape[1]),
        "num_classes": int(ds.num_classes),
        "num_edges": int(edges.shape[0]),
        "checksums": {fname: _sha256(os.path.join(path, fname))
                      for fname in _CHECKED_FILES},
    }
    with open(os.path.join(path, "meta.json"), "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def generate_sbm(blocks: int = 3, per_block: int = 300, p_in: float = 0.05,
                 p_out: float = 0.002, feat_dim: int = 16, noise: float = 1.0,
                 seed: int = 0, train_frac: float = 0.6,
                 val_frac: float = 0.2) -> Dataset:
    """Stochastic block model with one-hot block signal plus Gaussian noise.

    Labels are block ids; splits are a seeded shuffle.  The generator
    guarantees every class appears in the train split (per_block and
    train_frac keep that certain for any sane setting, and validate checks).
    """
    if feat_dim < blocks:
        raise DataFormatError(f"feat_dim {feat_dim} must be >= blocks {blocks}")
    rng = Rng(seed)
    n = blocks * per_block
    labels = np.repeat(np.arange(blocks, dtype=np.int64), per_block)

    ii, jj = np.triu_indices(n, k=1)
    prob = np.where(labels[ii] == labels[jj], p_in, p_out)
    keep = rng.uniform(ii.size) < prob
    graph = CsrGraph.from_edges(n, ii[keep], jj[keep], undirected=True)

    feats = np.zeros((n, feat_dim))
    feats[np.arange(n), labels] = 1.0
    feats += noise * rng.normal(n * feat_dim).reshape(n, feat_dim)

    perm = rng.permutation(n)
    n_train = int(round(train_frac * n))
    n_val = int(round(val_frac * n))
    splits = {
        "train": np.sort(perm[:n_train]).astype(np.int64),
        "val": np.sort(perm[n_train:n_train + n_val]).astype(np.int64),
        "test": np.sort(perm[n_train + n_val:]).astype(np.int64),
    }
    ds = Dataset(name=f"sbm-{blocks}x{per_block}-s{seed}", graph=graph,
                 features=feats, labels=labels, splits=splits, num_classes=blocks)
    ds.validate()
    return ds
