"""Exception type for conversion failures."""


class ConvertError(ValueError):
    """Source files are missing, malformed, or internally inconsistent."""
