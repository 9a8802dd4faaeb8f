"""Strictly convex penalties and curvature bounds."""
