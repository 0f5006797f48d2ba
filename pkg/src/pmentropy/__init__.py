"""Entropic test of state-independent contextuality on a simulated photonic ququart."""

__version__ = "0.1.0"
