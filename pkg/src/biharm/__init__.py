"""Numerical curvature engine for biharmonic hypersurfaces."""

__version__ = "0.1.0"
