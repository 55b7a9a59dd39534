"""Thinging-machine conceptual models: static checking, events, carving,
token simulation and exhaustive informal validation."""

__version__ = "0.1.0"
