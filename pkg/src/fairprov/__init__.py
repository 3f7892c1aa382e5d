"""Provenance capture, linked-data consolidation, querying and FAIR publication for robot test campaigns."""

__version__ = "0.1.0"
