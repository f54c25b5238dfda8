import math

import pytest

from stochastic_spacetime.core import (
    BracketFailureError,
    CoordinateFrameError,
    NumericalFailure,
    ParameterDomainError,
    ToolkitError,
    planck_units,
)


def test_planck_identities():
    u = planck_units()
    hbar = u.h / (2 * math.pi)
    assert u.t_p * u.m_p == pytest.approx(hbar / u.c**2, rel=1e-12)
    assert u.t_p == pytest.approx(math.sqrt(u.h * u.G / (2 * math.pi * u.c**5)), rel=1e-12)
    assert u.l_p == pytest.approx(u.c * u.t_p, rel=1e-15)
    assert u.pi_p == 3.0
    assert u.t_p == pytest.approx(5.391247e-44, rel=1e-5)
    assert u.m_p == pytest.approx(2.176434e-8, rel=1e-5)


def test_error_hierarchy():
    assert issubclass(CoordinateFrameError, ParameterDomainError)
    assert issubclass(ParameterDomainError, ValueError)
    assert issubclass(BracketFailureError, NumericalFailure)
    assert issubclass(NumericalFailure, ToolkitError)
