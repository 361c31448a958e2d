"""Converters from published graph-dataset distributions to the canonical
dataset directory format consumed by the training package."""

__version__ = "0.1.0"

from .counts import EXPECTED_COUNTS, CountDivergenceWarning, check_counts
from .errors import ConvertError
from .ogb import convert_ogb
from .planetoid import convert_planetoid, detect_names
from .writer import canonical_edges, write_canonical

__all__ = [
    "CountDivergenceWarning",
    "ConvertError",
    "EXPECTED_COUNTS",
    "canonical_edges",
    "check_counts",
    "convert_ogb",
    "convert_planetoid",
    "detect_names",
    "write_canonical",
    "__version__",
]
