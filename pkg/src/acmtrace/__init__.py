"""Traceability graphs for seamless information-system architecture models."""

__version__ = "0.1.0"
