"""Benchmark for reconstructing images from linearly dimensionality-reduced data."""

__version__ = "0.1.0"
