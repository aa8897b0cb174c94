"""Certified computations around rigidity sequences of irrational rotations."""

__version__ = "0.1.0"
