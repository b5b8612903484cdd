"""Instanton counting as an ensemble of random partitions."""

__version__ = "0.1.0"
