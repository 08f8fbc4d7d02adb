"""Brownian and geodesic windings on modular homogeneous spaces Γ\\PSL₂(ℝ)."""

__version__ = "0.1.0"
