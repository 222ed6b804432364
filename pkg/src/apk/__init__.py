"""Aperiodic point sets, cut-and-project schemes and stripe structure."""

__version__ = "0.1.0"
