"""Numerical verification of three-dimensional Weyl structures with reduced holonomy."""

__version__ = "0.1.0"
