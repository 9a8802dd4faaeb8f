"""Simulation engines feeding the fusion core."""
