"""Vectorized query-based driving stack with intra-instance masked attention."""

__version__ = "0.1.0"
