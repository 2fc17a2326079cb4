"""Predatory-trader wealth dynamics on lattices and augmented networks."""

__version__ = "0.1.0"
