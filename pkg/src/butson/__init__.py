"""Exact-arithmetic toolkit for Butson Hadamard matrices BH(n, q)."""

__version__ = "0.1.0"
