"""Commit size, source code density and maintenance-activity classification."""

__version__ = "0.1.0"
