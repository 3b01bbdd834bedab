"""Profession taxonomy construction, subtitle mention mining and trend analytics."""

__version__ = "0.1.0"
