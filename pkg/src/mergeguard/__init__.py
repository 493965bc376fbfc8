"""Semantic conflict-freedom checking for three-way program merges."""

__version__ = "0.1.0"
