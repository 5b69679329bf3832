"""Exact finite-groupoid algebra: groupoids, 2-groupoids, crossed modules,
crossings, crossed extensions, exchangers, and the GDF toolchain."""

__version__ = "0.1.0"
