"""Representation zeta functions of quadratic Lie lattices, with sl4 as the worked case."""

__version__ = "0.1.0"
