"""OGB node-property converter, covering the ogbn-arxiv distribution.

Consumes the extracted raw layout:

    <root>/raw/edge.csv.gz            directed citation pairs "src,dst"
    <root>/raw/node-feat.csv.gz       comma-separated floats, one node per line
    <root>/raw/node-label.csv.gz      one class id per line
    <root>/raw/num-node-list.csv.gz   single count, used as a cross-check
    <root>/split/time/{train,valid,test}.csv.gz

Year and mapping metadata are dropped; only features, labels, splits, and
the (symmetrized, deduplicated) edges survive conversion.
"""

from __future__ import annotations

import gzip
import os

import numpy as np

from .counts import check_counts
from .errors import ConvertError
from .writer import canonical_edges, prepare_out_dir, write_canonical

SUPPORTED = ("ogbn-arxiv",)


def _load_csv_gz(path, dtype, ndmin: int):
    if not os.path.isfile(path):
        raise ConvertError(f"missing source file {path}")
    with gzip.open(path, "rt", encoding="utf-8") as f:
        try:
            return np.loadtxt(f, delimiter=",", dtype=dtype, ndmin=ndmin)
        except ValueError as exc:
            raise ConvertError(f"cannot parse {path}: {exc}") from None


def find_root(in_dir, name: str):
    """Locate the extracted dataset under in_dir, trying the usual layouts."""
    stem = name.replace("-", "_")
    short = name.split("-", 1)[-1]
    candidates = [in_dir,
                  os.path.join(in_dir, stem),
                  os.path.join(in_dir, short),
                  os.path.join(in_dir, "dataset", stem),
                  os.path.join(in_dir, "dataset", short)]
    for cand in candidates:
        if os.path.isfile(os.path.join(cand, "raw", "edge.csv.gz")):
            return cand
    tried = ", ".join(os.path.normpath(c) for c in candidates)
    raise ConvertError(f"no raw {name} distribution found; looked in: {tried}")


def _split_dir(root):
    time_dir = os.path.join(root, "split", "time")
    if os.path.isdir(time_dir):
        return time_dir
    split_root = os.path.join(root, "split")
    if os.path.isdir(split_root):
        subdirs = [d for d in sorted(os.listdir(split_root))
                   if os.path.isdir(os.path.join(split_root, d))]
        if len(subdirs) == 1:
            return os.path.join(split_root, subdirs[0])
    raise ConvertError(f"no split directory under {split_root}")


def load_arxiv(root):
    """Parse the raw files into (features, labels, src, dst, splits)."""
    raw = os.path.join(root, "raw")
    features = _load_csv_gz(os.path.join(raw, "node-feat.csv.gz"),
                            np.float32, ndmin=2)
    labels = _load_csv_gz(os.path.join(raw, "node-label.csv.gz"),
                          np.int64, ndmin=1)
    edges = _load_csv_gz(os.path.join(raw, "edge.csv.gz"), np.int64, ndmin=2)
    if edges.shape[1] != 2:
        raise ConvertError(f"edge.csv.gz rows have {edges.shape[1]} columns, expected 2")
    n = features.shape[0]
    if labels.shape != (n,):
        raise ConvertError(f"{labels.shape[0]} labels for {n} feature rows")

    count_file = os.path.join(raw, "num-node-list.csv.gz")
    if os.path.isfile(count_file):
        declared = int(_load_csv_gz(count_file, np.int64, ndmin=1)[0])
        if declared != n:
            raise ConvertError(
                f"num-node-list declares {declared} nodes but features hold {n}")

    split_dir = _split_dir(root)
    splits = {}
    for part, fname in (("train", "train.csv.gz"),
                        ("val", "valid.csv.gz"),
                        ("test", "test.csv.gz")):
        splits[part] = _load_csv_gz(os.path.join(split_dir, fname),
                                    np.int64, ndmin=1)
    return features, labels, edges[:, 0], edges[:, 1], splits


def convert_ogb(name: str, out_dir, in_dir=".", force: bool = False) -> dict:
    """Convert one OGB dataset into a canonical directory."""
    if name not in SUPPORTED:
        raise ConvertError(
            f"unsupported OGB dataset {name!r}; this converter handles "
            + ", ".join(SUPPORTED))
    root = find_root(in_dir, name)
    features, labels, src, dst, splits = load_arxiv(root)
    edges = canonical_edges(src, dst, features.shape[0])
    prepare_out_dir(out_dir, force=force)
    summary = write_canonical(out_dir, name, edges, features, labels, splits)
    check_counts(name, summary["n"], summary["num_edges"])
    return summary
