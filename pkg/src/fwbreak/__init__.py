"""Pseudospectral simulation and wave-breaking diagnostics for the periodic Fornberg-Whitham equation."""

__version__ = "0.1.0"
