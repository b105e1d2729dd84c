"""Exact solver and property verifier for zero-sum repeated games with a
more-informed controller."""

__version__ = "0.1.0"
