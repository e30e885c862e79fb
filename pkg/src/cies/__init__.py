"""Chance-constrained day-ahead scheduling of a community integrated energy system."""

__version__ = "0.1.0"
