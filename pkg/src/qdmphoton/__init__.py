"""Hole-spin gate synthesis in quantum dot molecules and photonic cluster-state generation."""

__version__ = "0.1.0"
