"""CSR graphs, normalization, and the sparse ops used for propagation.

A `CsrGraph` holds a square sparse matrix in CSR form.  Raw adjacencies
store no self-loops; the normalized propagation operator

    R(A) = (I + D)^(-1/2) (I + A) (I + D)^(-1/2)

materializes its own diagonal, so graphs built by `sym_normalize` are exempt
from the no-loop invariant.  `spmm` is tape-aware: the backward pass
multiplies by the transpose, which for undirected (value-symmetric) graphs
is the operator itself.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ShapeError
from .rng import Rng
from .tensor import Tensor


class CsrGraph:
    """Square CSR matrix with sorted, duplicate-free columns per row.

    `undirected` asserts value symmetry: (i, j) stored iff (j, i) is, with
    equal weight.  Ops that break symmetry (column masking) clear it.
    """

    __slots__ = ("n", "row_ptr", "col_idx", "values", "undirected", "has_loops",
                 "_transpose", "_normalized", "_rows")

    def __init__(self, n, row_ptr, col_idx, values, undirected=False, _allow_loops=False):
        self.n = int(n)
        self.row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        self.col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.undirected = bool(undirected)
        self.has_loops = bool(_allow_loops)
        self._transpose = None
        self._normalized = None
        self._rows = None
        self._validate()

    def _validate(self):
        if self.row_ptr.shape != (self.n + 1,):
            raise ShapeError(f"row_ptr must have length n+1={self.n + 1}, got {self.row_ptr.shape}")
        if self.row_ptr[0] != 0 or self.row_ptr[-1] != self.col_idx.size:
            raise ShapeError("row_ptr must start at 0 and end at nnz")
        if np.any(np.diff(self.row_ptr) < 0):
            raise ShapeError("row_ptr must be non-decreasing")
        if self.col_idx.size != self.values.size:
            raise ShapeError("col_idx and values length mismatch")
        if self.col_idx.size:
            if self.col_idx.min() < 0 or self.col_idx.max() >= self.n:
                raise ShapeError("column index out of range")
            if self.col_idx.size > 1:
                # strictly increasing columns within each row rules out duplicates
                d = np.diff(self.col_idx)
                b = self.row_ptr[1:-1]
                b = b[(b > 0) & (b < self.col_idx.size)]
                interior = np.ones(self.col_idx.size - 1, dtype=bool)
                interior[b - 1] = False  # pairs straddling a row boundary may decrease
                if np.any(d[interior] <= 0):
                    raise ShapeError("columns within a row must be strictly increasing")
            if not self.has_loops and np.any(self.col_idx == self.rows_expanded()):
                raise ShapeError("self-loops are not allowed in a raw adjacency")

    @property
    def nnz(self) -> int:
        return int(self.col_idx.size)

    def rows_expanded(self) -> np.ndarray:
        """Row index of each stored entry (cached)."""
        if self._rows is None:
            self._rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.row_ptr))
        return self._rows

    @classmethod
    def from_edges(cls, n, src, dst, undirected=True):
        """Build from edge endpoint arrays; symmetrizes, dedupes, strips loops."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise ShapeError(f"edge endpoint out of range for n={n}")
        if undirected:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        keep = src != dst
        src, dst = src[keep], dst[keep]
        key = src * np.int64(n) + dst
        key = np.unique(key)
        src, dst = key // n, key % n
        row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=row_ptr[1:])
        return cls(n, row_ptr, dst, np.ones(dst.size), undirected=undirected)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        a[self.rows_expanded(), self.col_idx] = self.values
        return a

    def transpose(self) -> "CsrGraph":
        if self.undirected:
            return self
        if self._transpose is None:
            rows = self.rows_expanded()
            order = np.lexsort((rows, self.col_idx))
            row_ptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.col_idx, minlength=self.n), out=row_ptr[1:])
            self._transpose = CsrGraph(self.n, row_ptr, rows[order], self.values[order],
                                       undirected=False, _allow_loops=self.has_loops)
        return self._transpose

    def normalized(self) -> "CsrGraph":
        """Cached R(A) of this graph."""
        if self._normalized is None:
            self._normalized = sym_normalize(self)
        return self._normalized


def sym_normalize(g: CsrGraph) -> CsrGraph:
    """R(A) = (I+D)^(-1/2) (I+A) (I+D)^(-1/2), D the weighted degree matrix.

    The diagonal comes out as 1/(1+deg); an isolated node maps to 1, so
    propagation through R is always well defined.
    """
    rows = g.rows_expanded()
    deg = np.bincount(rows, weights=g.values, minlength=g.n)
    isq = 1.0 / np.sqrt(1.0 + deg)
    diag_idx = np.arange(g.n, dtype=np.int64)
    all_rows = np.concatenate([rows, diag_idx])
    all_cols = np.concatenate([g.col_idx, diag_idx])
    all_vals = np.concatenate([g.values * isq[rows] * isq[g.col_idx], 1.0 / (1.0 + deg)])
    order = np.lexsort((all_cols, all_rows))
    row_ptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(all_rows, minlength=g.n), out=row_ptr[1:])
    return CsrGraph(g.n, row_ptr, all_cols[order], all_vals[order],
                    undirected=g.undirected, _allow_loops=True)


def spmm(op: CsrGraph, x: Tensor) -> Tensor:
    """op @ x, recorded on x's tape when x requires grad."""
    if op.n != x.shape[0]:
        raise ShapeError(f"spmm: operator is {op.n}x{op.n}, input has {x.shape[0]} rows")
    out = kernels.spmm(op.row_ptr, op.col_idx, op.values, x.data)
    if x.tape is None:
        return Tensor(out)
    t = op.transpose()

    def bwd(g):
        return (kernels.spmm(t.row_ptr, t.col_idx, t.values, g),)

    return x.tape._record(out, (x.node,), bwd)


def drop_edge(g: CsrGraph, rate: float, rng: Rng) -> CsrGraph:
    """Keep each undirected edge with probability 1-rate (both directions).

    One Bernoulli draw per undirected edge, taken in canonical (i < j) order,
    so the mask sequence is independent of storage details.  rate=0 returns
    an identical copy.
    """
    if not g.undirected:
        raise ShapeError("drop_edge expects an undirected graph")
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"drop rate must be in [0, 1], got {rate}")
    rows = g.rows_expanded()
    upper = rows < g.col_idx
    keys_upper = rows[upper] * np.int64(g.n) + g.col_idx[upper]  # ascending
    keep_upper = rng.bernoulli_keep(1.0 - rate, keys_upper.size)
    kept_keys = keys_upper[keep_upper]
    lo = np.minimum(rows, g.col_idx)
    hi = np.maximum(rows, g.col_idx)
    canon = lo * np.int64(g.n) + hi
    pos = np.searchsorted(kept_keys, canon)
    keep = (pos < kept_keys.size) & (kept_keys[np.minimum(pos, kept_keys.size - 1)] == canon) \
        if kept_keys.size else np.zeros(canon.size, dtype=bool)
    return _filter_entries(g, keep, undirected=True)


def drop_node_mask(n: int, rate: float, rng: Rng) -> np.ndarray:
    """Bernoulli keep vector over nodes, P(keep) = 1-rate."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"drop rate must be in [0, 1], got {rate}")
    return rng.bernoulli_keep(1.0 - rate, n)


def mask_cols(g: CsrGraph, keep: np.ndarray) -> CsrGraph:
    """Zero out columns where keep is False (A @ diag(keep))."""
    return _filter_entries(g, keep[g.col_idx], undirected=False)


def mask_rows_cols(g: CsrGraph, keep_rows: np.ndarray, keep_cols: np.ndarray) -> CsrGraph:
    """Restrict entries to kept rows and kept columns."""
    m = keep_rows[g.rows_expanded()] & keep_cols[g.col_idx]
    return _filter_entries(g, m, undirected=False)


def _filter_entries(g: CsrGraph, keep: np.ndarray, undirected: bool) -> CsrGraph:
    rows = g.rows_expanded()[keep]
    row_ptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=g.n), out=row_ptr[1:])
    return CsrGraph(g.n, row_ptr, g.col_idx[keep], g.values[keep],
                    undirected=undirected, _allow_loops=g.has_loops)


def ladies_probs(g: CsrGraph, row_mask: np.ndarray) -> np.ndarray:
    """Column sampling distribution given the already-selected next layer.

    p_j is the squared column mass of A restricted to the selected rows,
    normalized to sum 1.  If the selected rows have no edges at all the
    distribution falls back to uniform.
    """
    row_mask = np.asarray(row_mask, dtype=bool)
    if row_mask.shape != (g.n,):
        raise ShapeError(f"row_mask must have shape ({g.n},), got {row_mask.shape}")
    mass = kernels.col_sq_mass(g.row_ptr, g.col_idx, g.values, row_mask)
    total = mass.sum()
    if total <= 0.0:
        return np.full(g.n, 1.0 / g.n)
    return mass / total


def ladies_sample(p: np.ndarray, s: int, rng: Rng) -> np.ndarray:
    """s distinct indices ~ p without replacement; zero-prob entries never chosen.

    Returns fewer than s indices when p has fewer than s positive entries.
    """
    return rng.weighted_sample_without_replacement(np.asarray(p, dtype=np.float64), s)
