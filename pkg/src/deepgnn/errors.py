"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested op."""


class NumericDomainError(ValueError):
    """An op was fed values outside its mathematical domain (log of <= 0, ...)."""


class TapeError(RuntimeError):
    """Tape misuse: mixing tapes, backward without a tape, double backward."""


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class DataFormatError(ValueError):
    """On-disk dataset violates the canonical format or its invariants."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""
