"""Bounds on permanents and diagonal products of rank-bounded stochastic matrices."""

__version__ = "0.1.0"
