"""Experiment harness: splits, methods, repetitions."""
