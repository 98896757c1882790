"""Compile cycle-count statistics into efficient algebraic formulas."""

__version__ = "0.1.0"
