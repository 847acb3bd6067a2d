"""Continuation solver and estimate verifier for the radial singular p-Laplace problem."""

__version__ = "0.1.0"
