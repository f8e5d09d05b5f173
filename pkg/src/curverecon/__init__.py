"""Reconstruction of surfaces from principal curvatures along a curve."""
__version__ = "0.1.0"
