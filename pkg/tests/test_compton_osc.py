import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochastic_spacetime.core import BracketFailureError, ParameterDomainError, planck_units
from stochastic_spacetime.compton_osc import (
    LEGACY_PROTON_T_BAR,
    OscillationConfig,
    axis_moves,
    detect_axis,
    fit_threshold,
    mass_of_t_bar,
    monotone_within,
    periodogram,
    simulate_oscillation,
    spectral_detect,
    t_bar_of_mass,
    threshold_sweep,
)
from stochastic_spacetime.rng import RngStream

PROTON = 1.67262192369e-27


def test_planck_mass_t_bar():
    m_p = planck_units().m_p
    assert abs(t_bar_of_mass(m_p) - math.pi / 3) < 1e-9
    assert abs(t_bar_of_mass(m_p, planck_pi=True) - 1.0) < 1e-12
    assert abs(t_bar_of_mass(m_p, axes=1) - math.pi) < 1e-9


@given(st.floats(1e-30, 1e3), st.floats(1e-3, 1e3))
def test_inverse_mass_law(m, factor):
    assert t_bar_of_mass(m * factor) == pytest.approx(t_bar_of_mass(m) / factor, rel=1e-12)
    assert mass_of_t_bar(t_bar_of_mass(m)) == pytest.approx(m, rel=1e-12)


def test_proton_value():
    t = t_bar_of_mass(PROTON)
    assert 1.3e19 < t < 1.4e19
    assert abs(math.log10(LEGACY_PROTON_T_BAR / t)) > 10


def test_noiseless_series_is_triangle_wave():
    series = simulate_oscillation(OscillationConfig(4, 1.0, steps=300))
    moves = axis_moves(series[0], 0, 3)
    assert moves[:12].tolist() == [1, 2, 3, 4, 3, 2, 1, 0, 1, 2, 3, 4]
    # round robin: axis 1 has not moved before step 1
    assert series[1, 0] == 0 and series[1, 1] == 1


def test_periodogram_parseval():
    x, _ = RngStream(1).normals(256)
    _, p = periodogram(x)
    assert abs(p.sum() - x.var()) < 1e-12


def test_detects_clean_oscillation_at_drive_frequency():
    cfg = OscillationConfig(32, 1.0, steps=4096)
    rep = detect_axis(cfg)
    assert rep.detected
    assert abs(rep.dominant_freq - cfg.drive_frequency) < 1 / 4096 * 3


def test_pure_noise_rarely_detected():
    hits = sum(detect_axis(OscillationConfig(32, 0.0, steps=4096, rng=RngStream(2, i))).detected for i in range(50))
    assert hits <= 2


def test_sub_planck_period_undetectable():
    assert detect_axis(OscillationConfig(0.5, 1.0, steps=4096)).snr == 0.0


def test_spectral_detect_sine():
    n = 4096
    x = np.cumsum(np.sign(np.sin(2 * np.pi * np.arange(n) / 50)))
    rep = spectral_detect(x, expected_freq=1 / 50)
    assert rep.detected and abs(rep.dominant_freq - 1 / 50) < 2 / 512


def test_fit_threshold():
    t = np.array([0.5, 1, 2, 4])
    assert fit_threshold(t, [0, 0, 1, 1]) == pytest.approx(math.sqrt(2))
    smooth = fit_threshold(t, [0.05, 0.3, 0.8, 0.97])
    assert 1 < smooth < 2
    with pytest.raises(BracketFailureError):
        fit_threshold(t, [1, 1, 1, 1])


def test_monotone_within():
    assert monotone_within([0, 0.5, 1], [0.1, 0.1, 0.1])
    assert monotone_within([0.5, 0.45, 1], [0.1, 0.1, 0.1])
    assert not monotone_within([1.0, 0.0], [0.05, 0.05])


def test_small_sweep_is_reproducible():
    grid = [0.5, 2, 8]
    a = threshold_sweep(grid, 0.7, 3, rng=RngStream(4), steps=1024)
    b = threshold_sweep(grid[::-1], 0.7, 3, rng=RngStream(4), steps=1024)
    assert a.trials == b.trials
    assert a.probability[0] == 0 and a.probability[-1] == 1


def test_validation():
    with pytest.raises(ParameterDomainError):
        OscillationConfig(10, steps=100)
    with pytest.raises(ParameterDomainError):
        OscillationConfig(10, angle_measure=1.5, steps=1000)
    with pytest.raises(ParameterDomainError):
        t_bar_of_mass(-1.0)
    with pytest.raises(ParameterDomainError):
        t_bar_of_mass(1.0, axes=2)
