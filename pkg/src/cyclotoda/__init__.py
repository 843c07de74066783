"""Harmonic bundles of cyclic type: growth data, weights and a Toda solver."""

__version__ = "0.1.0"
