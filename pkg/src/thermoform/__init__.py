"""Numerical thermodynamic formalism on shifts, interval maps and skew products."""

__version__ = "0.1.0"
