"""Exact and numeric tools for the quantum spheres O(S^2_qr) and their line bundles."""

__version__ = "0.1.0"
