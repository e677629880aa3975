"""Exact simulator and numerical verifier for a quantum bit-escrow scheme,
the cheating strategies against it, and the biased coin flip built on it."""

from . import adversaries, analysis, protocols, qmath

__all__ = ["adversaries", "analysis", "protocols", "qmath"]
__version__ = "0.1.0"
