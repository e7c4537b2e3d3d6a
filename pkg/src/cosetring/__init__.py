"""Signed coset decompositions of integer functions with small algebra norm."""

__version__ = "0.1.0"
