"""Exact lattice machinery for chirality of even hyperbolic lattices."""
__version__ = "0.1.0"
