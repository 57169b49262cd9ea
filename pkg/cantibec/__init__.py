"""Atom-cantilever surface-potential coupling simulator."""

__version__ = "0.1.0"
