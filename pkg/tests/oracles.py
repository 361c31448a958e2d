"""Independent reference implementations the tests check against.

Everything here is deliberately naive (python loops, dense linear algebra)
and shares no code with the package under test.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64_sequence(seed, count):
    """Reference SplitMix64 written from its definition on python ints."""
    out = []
    state = seed & MASK64
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


def dense_matmul(a, b):
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            s = 0.0
            for l in range(k):
                s += a[i, l] * b[l, j]
            out[i, j] = s
    return out


def dense_sym_normalize(a):
    """R(A) computed densely: (I+D)^(-1/2) (I+A) (I+D)^(-1/2)."""
    n = a.shape[0]
    deg = a.sum(axis=1)
    isq = np.diag(1.0 / np.sqrt(1.0 + deg))
    return isq @ (np.eye(n) + a) @ isq


def finite_difference_grad(f, x, h=1e-6):
    """Central differences of a scalar function of one array argument."""
    g = np.zeros_like(x, dtype=np.float64)
    for idx in np.ndindex(*x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def relative_grad_error(got, want):
    scale = np.max(np.abs(want)) + 1e-12
    return np.max(np.abs(got - want)) / scale


def random_csr_adjacency(rng, n, density=0.15):
    """Random undirected loop-free 0/1 adjacency as a dense matrix."""
    a = (rng.random((n, n)) < density).astype(np.float64)
    a = np.triu(a, k=1)
    return a + a.T


def dense_to_graph(a):
    """Convert a dense adjacency to the package's CsrGraph."""
    from deepgnn.graph import CsrGraph
    src, dst = np.nonzero(np.triu(a, k=1))
    return CsrGraph.from_edges(a.shape[0], src, dst, undirected=True)
