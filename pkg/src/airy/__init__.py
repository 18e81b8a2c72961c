"""Exact computer algebra for topological gravity and the deformed Airy curve."""
from .series import HalfLaurent, MPoly, Rat, Window

__all__ = ["HalfLaurent", "MPoly", "Rat", "Window"]
__version__ = "0.1.0"
