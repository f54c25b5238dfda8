"""
Sequence-time oscillation of a mass
===================================

A mass is modelled as an angle that climbs for T moves and falls for T
moves, where T is its half-period in Planck times.  We ask when a noisy
version of that oscillation can still be picked out of a periodogram.
"""

import numpy as np

from stochastic_spacetime.compton_osc import (
    OscillationConfig,
    detect_axis,
    mass_of_t_bar,
    t_bar_of_mass,
    threshold_sweep,
)
from stochastic_spacetime.core import planck_units
from stochastic_spacetime.rng import RngStream

units = planck_units()
print(f"T(Planck mass)            = {t_bar_of_mass(units.m_p):.6f}  (pi/3 = {np.pi / 3:.6f})")
print(f"  with pi_p = 3           = {t_bar_of_mass(units.m_p, planck_pi=True):.6f}")
print(f"T(proton)                 = {t_bar_of_mass(1.67262192369e-27):.3e}")
print(f"mass with T = 1           = {mass_of_t_bar(1.0):.3e} kg")

for measure in (1.0, 0.7, 0.3):
    rep = detect_axis(OscillationConfig(32, measure, steps=8192, rng=RngStream(1)))
    print(f"T=32, measure {measure}: peak at {rep.dominant_freq:.5f} cycles/step, snr {rep.snr:.1f}, detected={rep.detected}")

grid = np.logspace(-1, 2, 10)
sweep = threshold_sweep(grid, 0.7, 20, rng=RngStream(2))
print("\nT        P(detect)")
for t, p in zip(sweep.t_bars, sweep.probability):
    print(f"{t:8.3f} {p:.2f}")
print(f"50% threshold near T = {sweep.threshold:.2f}")
