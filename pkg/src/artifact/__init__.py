"""Exact counting, congruence enumeration and exponent bookkeeping."""

__version__ = "0.1.0"
