"""Finite-scale verification lab for building links, equivariant harmonic maps
and parabolic block matrices over R, C and H."""

from .linalg import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
