"""Numerical toolkit for eighth-moment and additive divisor sum computations."""

__version__ = "0.1.0"
