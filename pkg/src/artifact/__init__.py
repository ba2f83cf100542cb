"""Coherence-void polaron toolkit: continuum saddles, Volterra closures,
two-replica circuit Monte Carlo, tilted gas cloning and spectral checks."""

__version__ = "0.1.0"
