"""Combinatorial engine for matings of critically preperiodic quadratic polynomials."""

__version__ = "0.1.0"
