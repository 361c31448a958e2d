"""Planetoid citation-network converter (Cora, Citeseer, PubMed).

A distribution directory holds eight pickled pieces per dataset:

    ind.<name>.x           train features, scipy CSR
    ind.<name>.tx          test features, CSR, rows in test.index file order
    ind.<name>.allx        train + unlabeled features, CSR
    ind.<name>.y/ty/ally   one-hot labels matching x/tx/allx
    ind.<name>.graph       adjacency dict, node -> neighbor list
    ind.<name>.test.index  test node ids, one per line, not sorted

The pickles are Python 2 era, so everything is read with latin1 encoding.
Citeseer's test.index skips a handful of isolated nodes; following the
reference loader convention those gaps become zero feature rows at the
published indices, and their (all-zero) one-hot rows decode to label 0.
Such nodes belong to no split, so the placeholder label is never trained
or scored.

Standard splits: train is the first len(y) nodes, val the next 500, test
the sorted test.index.
"""

from __future__ import annotations

import os
import pickle

import numpy as np

from .counts import check_counts
from .errors import ConvertError
from .writer import canonical_edges, prepare_out_dir, write_canonical

PICKLED_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph")
VAL_SIZE = 500


def _part_path(in_dir, name: str, part: str) -> str:
    return os.path.join(in_dir, f"ind.{name}.{part}")


def _read_pickle(path):
    if not os.path.isfile(path):
        raise ConvertError(f"missing source file {path}")
    try:
        with open(path, "rb") as f:
            return pickle.load(f, encoding="latin1")
    except (pickle.UnpicklingError, EOFError, ValueError) as exc:
        raise ConvertError(f"cannot unpickle {path}: {exc}") from None


def _dense(mat, what: str) -> np.ndarray:
    # x/tx/allx are scipy CSR in the published files; tolerate plain arrays
    if hasattr(mat, "toarray"):
        mat = mat.toarray()
    arr = np.asarray(mat)
    if arr.ndim != 2:
        raise ConvertError(f"{what} is not a matrix")
    return arr


def _read_test_index(path) -> np.ndarray:
    if not os.path.isfile(path):
        raise ConvertError(f"missing source file {path}")
    idx = np.loadtxt(path, dtype=np.int64, ndmin=1)
    if idx.size == 0:
        raise ConvertError(f"{path} lists no test nodes")
    if np.unique(idx).size != idx.size:
        raise ConvertError(f"{path} repeats node ids")
    return idx


def detect_names(in_dir) -> list:
    """Dataset names with a complete ind.<name>.* set under in_dir."""
    if not os.path.isdir(in_dir):
        raise ConvertError(f"input directory {in_dir!r} does not exist")
    names = set()
    for entry in os.listdir(in_dir):
        if entry.startswith("ind.") and entry.endswith(".x"):
            names.add(entry[len("ind."):-len(".x")])
    return sorted(names)


def load_planetoid(in_dir, name: str):
    """Parse one distribution into (features, labels, src, dst, splits, num_classes)."""
    x, y, tx, ty, allx, ally, graph = (
        _read_pickle(_part_path(in_dir, name, part)) for part in PICKLED_PARTS)
    test_idx = _read_test_index(_part_path(in_dir, name, "test.index"))

    x = _dense(x, "x")
    tx = _dense(tx, "tx")
    allx = _dense(allx, "allx")
    y = np.asarray(y)
    ty = np.asarray(ty)
    ally = np.asarray(ally)
    if not (x.shape[1] == tx.shape[1] == allx.shape[1]):
        raise ConvertError("x/tx/allx disagree on feature width")
    if not (y.shape[1] == ty.shape[1] == ally.shape[1]):
        raise ConvertError("y/ty/ally disagree on class count")
    if ally.shape[0] != allx.shape[0]:
        raise ConvertError("ally does not cover allx")

    test_sorted = np.sort(test_idx)
    lo, hi = int(test_sorted[0]), int(test_sorted[-1])
    if lo != allx.shape[0]:
        raise ConvertError(
            f"test.index starts at {lo} but allx holds {allx.shape[0]} rows")
    span = hi - lo + 1
    if span != test_idx.size:
        # gap fill: zero rows at the skipped indices (citeseer)
        full_tx = np.zeros((span, tx.shape[1]), dtype=tx.dtype)
        full_ty = np.zeros((span, ty.shape[1]), dtype=ty.dtype)
        full_tx[test_sorted - lo] = tx
        full_ty[test_sorted - lo] = ty
        tx, ty = full_tx, full_ty
    elif tx.shape[0] != span:
        raise ConvertError(f"tx holds {tx.shape[0]} rows for {span} test ids")

    features = np.vstack([allx, tx]).astype(np.float32)
    onehot = np.vstack([ally, ty])
    # tx rows sit in file order; put each at its published node id
    features[test_idx] = features[test_sorted]
    onehot[test_idx] = onehot[test_sorted]
    labels = np.argmax(onehot, axis=1).astype(np.int64)

    if not isinstance(graph, dict):
        raise ConvertError("graph part is not an adjacency dict")
    src, dst = [], []
    for u, nbrs in graph.items():
        src.extend([u] * len(nbrs))
        dst.extend(nbrs)

    n_train = y.shape[0]
    if n_train + VAL_SIZE > lo:
        raise ConvertError(
            f"cannot carve a {VAL_SIZE}-node val split from {lo} labeled+unlabeled rows")
    splits = {
        "train": np.arange(n_train, dtype=np.int64),
        "val": np.arange(n_train, n_train + VAL_SIZE, dtype=np.int64),
        "test": test_sorted,
    }
    return features, labels, np.asarray(src), np.asarray(dst), splits, int(y.shape[1])


def convert_planetoid(in_dir, name: str, out_dir, force: bool = False) -> dict:
    """Convert one planetoid dataset into a canonical directory."""
    features, labels, src, dst, splits, num_classes = load_planetoid(in_dir, name)
    edges = canonical_edges(src, dst, features.shape[0])
    prepare_out_dir(out_dir, force=force)
    summary = write_canonical(out_dir, name, edges, features, labels, splits,
                              num_classes=num_classes)
    check_counts(name, summary["n"], summary["num_edges"])
    return summary
