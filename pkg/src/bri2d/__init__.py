"""Simulation and verification engine for two-dimensional Brownian random
interlacements: conditioned-motion samplers, the Poisson moustache soup,
vacant-set geometry, closed-form evaluations, and scenario experiments."""

__version__ = "0.1.0"
