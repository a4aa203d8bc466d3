"""Delay-aware STDMA scheduling on grid sensor networks."""

__version__ = "0.1.0"
