"""Exact-plus-Monte-Carlo toolkit for the commutant calculus of doped Clifford circuits."""

__version__ = "0.1.0"
