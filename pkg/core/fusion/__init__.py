"""Hybrid and section-based fusion models."""
