"""Hot CSR kernels with two interchangeable backends.

The numba backend is the default; set DEEPGNN_NO_NUMBA=1 (or install without
numba) to get the pure-numpy fallback.  Both backends accumulate in the same
order, so results are bit-identical, which the test suite asserts.  Callers
go through this module's attributes (`kernels.spmm(...)`) rather than
from-imports so the benchmark and tests can swap backends.
"""

import os

from . import _numpy

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a hard dep in normal installs
    _numba = None

_disabled = os.environ.get("DEEPGNN_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}
USE_NUMBA = _numba is not None and not _disabled
BACKEND = "numba" if USE_NUMBA else "numpy"

_active = _numba if USE_NUMBA else _numpy

spmm = _active.spmm
col_sq_mass = _active.col_sq_mass
