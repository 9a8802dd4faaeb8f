"""Euclidean projection onto the probability simplex."""
