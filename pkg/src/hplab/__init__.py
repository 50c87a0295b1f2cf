"""Numerical verification of directional, weighted Hardy-Poincare and variable exponent inequalities."""

__version__ = "0.1.0"
