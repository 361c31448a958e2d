"""Byte-level writer for the canonical dataset directory format.

The format is the interface between this package and the training stack,
so it is implemented here from scratch rather than borrowed:

    meta.json      {"name", "n", "d", "num_classes", "num_edges", "checksums"}
    edges.bin      little-endian uint32 pairs, one direction per undirected edge,
                   strictly upper triangle (i < j), lexicographic order
    features.bin   little-endian float32, row major, n x d
    labels.bin     little-endian uint16, length n
    splits.json    {"train": [...], "val": [...], "test": [...]}, sorted ascending

checksums maps each of the four data files to its sha256 hex digest.  Given
identical inputs the emitted bytes are identical.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .errors import ConvertError

CHECKED_FILES = ("edges.bin", "features.bin", "labels.bin", "splits.json")


def canonical_edges(src, dst, n: int) -> np.ndarray:
    """Symmetrize, strip self loops, and deduplicate an edge list.

    Returns an (m, 2) int64 array with row[0] < row[1], sorted
    lexicographically, which is exactly the on-disk edge order.
    """
    src = np.asarray(src, dtype=np.int64).ravel()
    dst = np.asarray(dst, dtype=np.int64).ravel()
    if src.shape != dst.shape:
        raise ConvertError(f"edge endpoint arrays disagree: {src.size} vs {dst.size}")
    if src.size == 0:
        raise ConvertError("source graph has no edges")
    lo = min(int(src.min()), int(dst.min()))
    hi = max(int(src.max()), int(dst.max()))
    if lo < 0 or hi >= n:
        raise ConvertError(
            f"edge endpoints span [{lo}, {hi}] but the graph has {n} nodes")
    keep = src != dst
    a = np.minimum(src[keep], dst[keep])
    b = np.maximum(src[keep], dst[keep])
    if a.size == 0:
        raise ConvertError("source graph has only self loops")
    return np.unique(np.stack([a, b], axis=1), axis=0)


def check_splits(splits: dict, labels, num_classes: int, n: int) -> None:
    """Reject split sets the training stack would refuse to load."""
    labels = np.asarray(labels)
    seen = np.zeros(n, dtype=bool)
    for part in ("train", "val", "test"):
        if part not in splits:
            raise ConvertError(f"missing split {part!r}")
        idx = np.asarray(splits[part], dtype=np.int64)
        if idx.size == 0:
            raise ConvertError(f"split {part!r} is empty")
        if idx.min() < 0 or idx.max() >= n:
            raise ConvertError(f"split {part!r} has out-of-range indices")
        if np.unique(idx).size != idx.size:
            raise ConvertError(f"split {part!r} has duplicate indices")
        if seen[idx].any():
            raise ConvertError(f"split {part!r} overlaps another split")
        seen[idx] = True
    train_classes = np.unique(labels[np.asarray(splits["train"], dtype=np.int64)])
    if train_classes.size != num_classes:
        missing = sorted(set(range(num_classes)) - set(train_classes.tolist()))
        raise ConvertError(f"classes {missing} never appear in the train split")


def prepare_out_dir(path, force: bool = False) -> None:
    # refuse to scribble over an existing conversion unless asked
    if os.path.isdir(path):
        if os.listdir(path) and not force:
            raise ConvertError(
                f"output directory {path!r} is not empty (pass --force to overwrite)")
    elif os.path.exists(path):
        raise ConvertError(f"output path {path!r} exists and is not a directory")
    else:
        os.makedirs(path)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_canonical(out_dir, name: str, edges, features, labels, splits,
                    num_classes=None) -> dict:
    """Write one converted dataset and return its summary counts.

    `edges` must already be in canonical order (see canonical_edges).
    Features are cast to float32, labels to uint16; splits are sorted
    ascending on the way out.  num_classes defaults to max(labels) + 1.
    """
    edges = np.asarray(edges, dtype=np.int64)
    features = np.ascontiguousarray(np.asarray(features), dtype="<f4")
    labels = np.asarray(labels)
    n, d = features.shape
    if labels.shape != (n,):
        raise ConvertError(f"labels shape {labels.shape}, expected ({n},)")
    if num_classes is None:
        num_classes = int(labels.max()) + 1
    num_classes = int(num_classes)
    if labels.min() < 0 or labels.max() >= num_classes:
        raise ConvertError(
            f"labels must lie in [0, {num_classes}), found "
            f"[{labels.min()}, {labels.max()}]")
    if num_classes > (1 << 16):
        raise ConvertError("labels do not fit in uint16")
    check_splits(splits, labels, num_classes, n)

    edges.astype("<u4").tofile(os.path.join(out_dir, "edges.bin"))
    features.tofile(os.path.join(out_dir, "features.bin"))
    labels.astype("<u2").tofile(os.path.join(out_dir, "labels.bin"))
    with open(os.path.join(out_dir, "splits.json"), "w", encoding="utf-8") as f:
        json.dump({k: sorted(int(i) for i in v) for k, v in splits.items()},
                  f, indent=2, sort_keys=True)
        f.write("\n")
    meta = {
        "name": name,
        "n": int(n),
        "d": int(d),
        "num_classes": num_classes,
        "num_edges": int(edges.shape[0]),
        "checksums": {fname: _sha256(os.path.join(out_dir, fname))
                      for fname in CHECKED_FILES},
    }
    with open(os.path.join(out_dir, "meta.json"), "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return {"name": name, "n": int(n), "d": int(d),
            "num_classes": num_classes, "num_edges": int(edges.shape[0]),
            "out": str(out_dir)}
