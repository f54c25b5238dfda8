"""Physical constants, Planck units and the shared exception hierarchy."""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018 (NIST SP 961, May 2019). h and c are exact by SI definition.
H_PLANCK = 6.626_070_15e-34  # J s
C_LIGHT = 299_792_458.0  # m / s
G_NEWTON = 6.674_30e-11  # m^3 kg^-1 s^-2
PROTON_MASS = 1.672_621_923_69e-27  # kg
SOLAR_MASS = 1.988_47e30  # kg, IAU 2015 nominal (GM_sun / G)

PLANCK_PI = 3.0


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class ParameterDomainError(ToolkitError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class CoordinateFrameError(ParameterDomainError):
    """Metrics with different coordinate labels were combined."""


class PerturbationRegimeError(ParameterDomainError):
    """A perturbation amplitude is too large for the perturbative metric."""


class NumericalFailure(ToolkitError):
    """A computation could not be completed for numerical reasons."""


class NonphysicalDeterminantError(NumericalFailure):
    """The metric determinant has no real square root of its negative."""

    def __init__(self, value: complex):
        super().__init__(f"nonphysical determinant {value!r}")
        self.value = value


class SingularTransformError(NumericalFailure):
    pass


class SingularMetricError(NumericalFailure):
    pass


class ConventionCalibrationError(NumericalFailure):
    pass


class IllConditionedProbeError(NumericalFailure):
    pass


class BracketFailureError(NumericalFailure):
    pass


@dataclass(frozen=True)
class PlanckUnits:
    """Planck scale in SI units, with the lattice convention pi_p = 3."""

    l_p: float
    t_p: float
    m_p: float
    h: float
    G: float
    c: float
    pi_p: float = PLANCK_PI

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * math.pi)

    @property
    def sequence_frequency(self) -> float:
        """Hexagonal sequence-time cycle rate 2*pi_p/t_p for one transition per t_p."""
        return 2.0 * self.pi_p / self.t_p


def planck_units() -> PlanckUnits:
    h, G, c = H_PLANCK, G_NEWTON, C_LIGHT
    t_p = math.sqrt(h * G / (2.0 * math.pi * c**5))
    m_p = math.sqrt(h * c / (2.0 * math.pi * G))
    return PlanckUnits(l_p=c * t_p, t_p=t_p, m_p=m_p, h=h, G=G, c=c)
