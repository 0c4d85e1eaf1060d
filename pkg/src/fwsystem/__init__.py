"""Pseudospectral simulation and analysis of the two-component Fornberg-Whitham system."""

__version__ = "0.1.0"
