"""Exact and numerical tools for Kudla-Millson and Green forms on U(p,q)."""

__version__ = "0.1.0"
