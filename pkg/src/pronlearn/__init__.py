"""Data-driven pronunciation learning for grammar-based name recognition."""

__version__ = "0.1.0"
