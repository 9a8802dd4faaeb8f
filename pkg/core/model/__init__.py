"""Fingerprint datasets and per-axis estimate matrices."""
