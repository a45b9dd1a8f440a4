"""Numerical laboratory for Nyman-Beurling type distances and their random variants."""

__version__ = "0.1.0"
