"""Gradient projection solver and lattice oracle."""
