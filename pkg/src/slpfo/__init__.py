"""Enumeration of local first-order queries on structures compressed by straight-line programs."""

__version__ = "0.1.0"
