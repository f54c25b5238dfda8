"""
Curvature, geodesics and bundle volumes
=======================================

Christoffel symbols and the Ricci tensor come from central differences of
the metric.  We check them against closed forms, follow a circular orbit
around a Schwarzschild mass, and add metric noise to a free particle.
"""

import math

import numpy as np

from stochastic_spacetime.geometry import (
    GeodesicState,
    VolumeProbe,
    first_order_coefficient,
    geodesic_integrate,
    minkowski_field,
    norm_along,
    perturbed_field,
    plane_wave_field,
    plane_wave_ricci_reference,
    ricci,
    volume_evolution_terms,
)
from stochastic_spacetime.gravity_model import assemble_line_element
from stochastic_spacetime.rng import RngStream
from stochastic_spacetime.stochastic_walk import WalkConfig

k, w, z, t = 1.1, 0.8, 0.3, 0.5
r = ricci(plane_wave_field(k, w), z, t)
ref = plane_wave_ricci_reference(k, w, z, t)
for name, (m, n) in {"xx": (0, 0), "zz": (2, 2), "tt": (3, 3), "zt": (2, 3)}.items():
    print(f"R_{name}  numeric {complex(r[m, n]):.8f}   closed form {complex(ref[name]):.8f}")

# linear response of R_zt to a small plane-wave ripple on flat space
c = first_order_coefficient(lambda b: perturbed_field(k, w, b), np.array([0, 0, z, t]), (2, 3))
print(f"\ndR_zt/db = {c:.6f};  k w e^(-i alpha) = {k * w * np.exp(-1j * (k * z - w * t)):.6f}")

# one circular orbit at r = 10 r_s, coordinates (theta, phi, r, t)
field = assemble_line_element(1.0).metric_field()
m, r0 = 0.5, 10.0
omega = math.sqrt(m / r0**3)
ut = 1 / math.sqrt(1 - 3 * m / r0)
n = 1000
traj = geodesic_integrate(
    field, GeodesicState([math.pi / 2, 0, r0, 0], [0, omega * ut, 0, ut]), n, 2 * math.pi / omega / ut / n
)
end = traj.final.position.real
norms = norm_along(field, traj)
print(f"\norbit: r {r0} -> {end[2]:.9f}, phi -> {end[1]:.9f} (2 pi = {2 * math.pi:.9f})")
print(f"  drift of g(v, v): {np.abs(norms - norms[0]).max():.1e}")

# the same bundle identity in vacuum and in a weak wave
vac = volume_evolution_terms(field, VolumeProbe([math.pi / 2, 0, r0, 0], [0, omega * ut, 0, ut]))
pert = volume_evolution_terms(perturbed_field(1.0, 0.7, 1e-3), VolumeProbe([0, 0, 0.3, 0.1], [0, 0, 0, 1], tau=0.5))
print(f"\nvolume identity residual: vacuum {vac.residual:.1e}, weak wave {pert.residual:.1e}")

# random metric gradients turn a straight worldline into a diffusing one
cfg = WalkConfig(metric_fluctuation=1.0)
for steps in (20, 40, 80):
    ends = np.array([
        geodesic_integrate(minkowski_field(), GeodesicState(np.zeros(4), [0, 0, 0, 1]), steps, 0.1, cfg, RngStream(1, i))
        .final.position.real[:3]
        for i in range(100)
    ])
    print(f"  {steps:3d} steps: spatial variance {ends.var(axis=0).sum():.2e}")
