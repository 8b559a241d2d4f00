"""Deterministic simulator and optimizer for cache-enabled UAV base stations."""

__version__ = "0.1.0"
