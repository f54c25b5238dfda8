"""
Venues on the Planck lattice
============================

Each venue hops one site per axis per step when its indeterminacy coin
allows it.  With ds^2 conservation on, every spatial hop is paired with
three time hops.
"""

import numpy as np

from stochastic_spacetime.rng import RngStream
from stochastic_spacetime.stochastic_walk import (
    VenueState,
    WalkConfig,
    birthday_merges,
    helix_time,
    merge_statistics,
    run_walk,
    wiener_terminal,
)

rng = RngStream(2024)
for ds2 in (False, True):
    s = run_walk(WalkConfig(ds2_conservation=ds2, steps=100), 20_000, rng)
    print(f"ds2={ds2!s:5}  variance per axis {np.round(s.displacement_variance, 1)}")
    print(f"            superluminal per step {s.superluminal_fraction:.3f}, per 10 steps {s.superluminal_fraction_coarse:.3f}")

# a lazier vacuum diffuses more slowly
for u in (1.0, 0.5, 0.1):
    s = run_walk(WalkConfig(indeterminacy=u, steps=100), 10_000, rng.spawn(1))
    print(f"u={u:.1f}  x variance {s.displacement_variance[0]:.1f}")

# sequence time winds around a hexagon
for phase in range(7):
    t_c, angle, rep = helix_time(VenueState(t_coord=1, tau_phase=phase))
    print(f"phase {phase % 6}: angle {angle:.3f} rad, t/t_p = {rep / t_c:.3f}")

# empty venues meeting on a small periodic box
n, box = 200, (6, 6, 6)
merges = merge_statistics(WalkConfig(steps=50), n, box, rng)
mean, sd = birthday_merges(n, 216)
print(f"\nmerges per step: {merges / 50:.1f}; uniform placement expects {mean:.1f} +- {sd:.1f}")

# the two normalisations of a +-1 random walk
for norm in ("sqrt_n", "sqrt_i"):
    x = wiener_terminal(1000, 20_000, rng, norm)
    print(f"{norm}: terminal variance {x.var():.3f}")
