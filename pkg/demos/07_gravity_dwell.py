"""
Gravity as a lazy vacuum
========================

Near a mass the indeterminacy u = 1 - r_s / r drops, so venues wait longer
before moving.  The time a venue spends at a radius per visit grows like 1/u,
and u is exactly the g_tt of the Schwarzschild line element.
"""

from stochastic_spacetime.gravity_model import (
    IndeterminacyField,
    assemble_line_element,
    covariant_distance_demo,
    dwell_slope,
    planck_mass_radius,
    radial_migration_mc,
    schwarzschild_radius,
)
from stochastic_spacetime.rng import RngStream

print(f"R_s of the Sun: {schwarzschild_radius(1.98847e30):.1f} m")
r1, lp = planck_mass_radius(1.0)
r2, _ = planck_mass_radius(2.0)
print(f"R_s of a Planck mass: {r1 / lp:.3f} l_p (k=1), {r2 / lp:.3f} l_p (k=2)")

le = assemble_line_element(1.0)
for r in (1.5, 3.0, 10.0):
    print(f"r={r:5.1f}  g_tt={le.g_tt(r):+.4f}  g_rr={le.g_rr(r):.4f}  product={le.g_tt(r) * le.g_rr(r):+.1f}")

field = IndeterminacyField(100.0)
prof = radial_migration_mc(field, 300, 100_000, 2000, RngStream(3))
slope, corr = dwell_slope(prof, field)
print(f"\ndwell per visit against 1/u: log-log slope {slope:.3f}, correlation {corr:.3f}")
dpv = prof.dwell_per_visit
for r in (105, 120, 150, 200, 300):
    print(f"  r={r}  dwell/visit {dpv[r]:.2f}  1/u {prof.predicted[r]:.2f}")

print("\nclosing in on r_s = 1 m from 2 m")
for r, dist, xi in covariant_distance_demo(2.0, 1.0, 7):
    print(f"  r = {r:.7f}  covariant coordinate {xi:.3e}")
