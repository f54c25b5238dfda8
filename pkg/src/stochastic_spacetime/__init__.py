"""Simulation and verification toolkit for stochastic granular space-time."""

__version__ = "0.1.0"

from .core import PlanckUnits, planck_units  # noqa: E402
from .rng import RngStream, coin  # noqa: E402

__all__ = ["PlanckUnits", "planck_units", "RngStream", "coin", "__version__"]
