"""Experiment report rows and CSV output."""
