"""Simulation toolkit for fusion-based foliated Floquet color codes."""

__version__ = "0.1.0"
