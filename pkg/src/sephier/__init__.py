"""Numerical checks of separation for multi-particle Schrödinger hierarchies of identical particles."""

__version__ = "0.1.0"
