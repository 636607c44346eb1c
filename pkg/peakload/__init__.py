"""Heavy-tail inference for peak-load series."""

__version__ = "1.0.0"
