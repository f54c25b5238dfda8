"""
Interference from superposed metrics
====================================

Two single-slit metrics are mixed with equal weights and the density is read
off the determinant of the mixture.  No wavefunction appears anywhere.
"""

import numpy as np

from stochastic_spacetime.metric_algebra import (
    W_ZT,
    congruence_transform,
    interference_pattern,
    plane_wave_metric,
    probability_density,
    two_slit_metric,
)

# a single plane-wave metric has unit density at every phase
for a in (0.0, 1.0, 2.5):
    print(f"alpha={a:.1f}  sqrt(-det g) = {probability_density(plane_wave_metric(a)):.15f}")

# mixing two phases gives fringes
grid = np.linspace(0, 2 * np.pi, 9)
for variant in ("two_slit_1976", "plane_wave_2016"):
    print(f"\n{variant}")
    for alpha, d in interference_pattern(grid, 0.0, variant):
        bar = "#" * int(round(40 * d))
        print(f"  alpha={alpha:5.2f}  {d:.4f}  {bar}")

# the 1976 slit metric is complex, but a fixed congruence makes it real
g = congruence_transform(two_slit_metric(0.8), W_ZT)
print("\nW^T g W, z-t block at alpha = 0.8:")
print(np.round(g.entries[2:, 2:], 12))
