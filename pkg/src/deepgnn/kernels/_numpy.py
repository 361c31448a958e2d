"""Pure-numpy fallbacks for the CSR kernels.

np.add.at applies updates in index order, which matches the row-major k loop
of the numba backend, so the two produce identical bits.
"""

import numpy as np


def _expand_rows(row_ptr):
    n = row_ptr.shape[0] - 1
    return np.repeat(np.arange(n, dtype=np.int64), np.diff(row_ptr))


def spmm(row_ptr, col_idx, values, x):
    n = row_ptr.shape[0] - 1
    out = np.zeros((n, x.shape[1]))
    rows = _expand_rows(row_ptr)
    np.add.at(out, rows, values[:, None] * x[col_idx])
    return out


def col_sq_mass(row_ptr, col_idx, values, row_mask):
    """Per-column sum of squared entries over rows where row_mask is set."""
    n = row_ptr.shape[0] - 1
    out = np.zeros(n)
    keep = row_mask[_expand_rows(row_ptr)]
    np.add.at(out, col_idx[keep], values[keep] ** 2)
    return out
