"""Exact dualities and combinatorial mappings for planar abelian lattice
models, computed at desk scale by enumeration and linear algebra."""

__version__ = "0.1.0"
