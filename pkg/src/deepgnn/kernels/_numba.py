"""numba implementations of the CSR kernels.

Rows are independent in both kernels, so prange parallelism cannot reorder
any accumulation and output bits match the numpy backend exactly.
"""

import numpy as np
from numba import njit, prange


@njit(parallel=True, cache=True)
def spmm(row_ptr, col_idx, values, x):
    n = row_ptr.shape[0] - 1
    d = x.shape[1]
    out = np.zeros((n, d))
    for i in prange(n):
        for k in range(row_ptr[i], row_ptr[i + 1]):
            v = values[k]
            c = col_idx[k]
            for j in range(d):
                out[i, j] += v * x[c, j]
    return out


@njit(cache=True)
def col_sq_mass(row_ptr, col_idx, values, row_mask):
    """Per-column sum of squared entries over rows where row_mask is set."""
    n = row_ptr.shape[0] - 1
    out = np.zeros(n)
    for i in range(n):
        if not row_mask[i]:
            continue
        for k in range(row_ptr[i], row_ptr[i + 1]):
            out[col_idx[k]] += values[k] * values[k]
    return out
