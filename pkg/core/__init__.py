"""Hybrid localization core."""
