"""Compressed twin-decomposition codec with linear-time squaring and products."""

__version__ = "0.1.0"
