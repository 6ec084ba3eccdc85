"""Guandan match simulation, commentary pipeline, and evaluation metrics."""

__version__ = "0.1.0"
