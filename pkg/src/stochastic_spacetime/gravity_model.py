"""Indeterminacy field, radial dwell Monte Carlo and the Schwarzschild line element."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import C_LIGHT, G_NEWTON, CoordinateFrameError, ParameterDomainError, SingularMetricError, planck_units
from .geometry import MetricField
from .rng import RngStream, draw_words, word_to_unit


def schwarzschild_radius(m: float, k: float = 2.0, units=None) -> float:
    """R_s = k G m / c^2."""
    if not m > 0:
        raise ParameterDomainError("mass must be positive")
    if not k > 0:
        raise ParameterDomainError("k must be positive")
    g, c = (G_NEWTON, C_LIGHT) if units is None else (units.G, units.c)
    return k * g * m / c**2


@dataclass(frozen=True)
class IndeterminacyField:
    r_s: float

    def __post_init__(self):
        if self.r_s < 0:
            raise ParameterDomainError("r_s must be nonnegative")

    def u(self, r, physical: bool = True):
        """1 - r_s / r; with ``physical`` radii at or inside r_s are rejected."""
        r = np.asarray(r, dtype=float)
        if physical and np.any(r <= self.r_s):
            raise CoordinateFrameError("u is only defined outside r_s")
        return 1.0 - self.r_s / r


@dataclass(frozen=True)
class LineElement:
    r_s: float

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= self.r_s):
            raise CoordinateFrameError("line element evaluated at or inside r_s")
        return r

    def g_tt(self, r):
        return -(1.0 - self.r_s / self._check(r))

    def g_rr(self, r):
        return 1.0 / (1.0 - self.r_s / self._check(r))

    def metric_field(self) -> MetricField:
        """Coordinates (theta, phi, r, t); diag(r^2, r^2 sin^2 theta, g_rr, g_tt).

        Evaluation at or inside r_s raises SingularMetricError.
        """
        r_s = self.r_s

        def evaluate(x):
            theta, _, r, _ = x
            if r.real <= r_s:
                raise SingularMetricError(f"coordinate singularity: r = {r.real:.6g} <= r_s")
            u = 1.0 - r_s / r
            return np.diag([r * r, r * r * np.sin(theta) ** 2, 1.0 / u, -u])

        return MetricField(evaluate, smoothness_scale=max(r_s, 1e-300) if r_s > 0 else 1.0)


def assemble_line_element(r_s: float) -> LineElement:
    if not r_s > 0:
        raise ParameterDomainError("r_s must be positive")
    return LineElement(float(r_s))


# --- radial Monte Carlo ------------------------------------------------------------


@numba.njit(cache=True)
def _radial_kernel(seed, stream_base, counter0, r_s, constant_u, start, steps, r_max, visits, dwell, frozen):
    """Integer radii; bins are single lattice sites 0..r_max."""
    n = frozen.shape[0]
    for w in range(n):
        sid = stream_base + np.uint64(w)
        r = start
        visits[r] += 1
        for s in range(0, steps, 2):
            a0, a1, a2, a3 = draw_words(seed, sid, counter0 + np.uint64(s // 2))
            for half in range(2):
                if s + half >= steps:
                    break
                dwell[r] += 1
                if r <= r_s:
                    frozen[w] = True
                    continue
                gate = a0 if half == 0 else a2
                coin = a1 if half == 0 else a3
                u = constant_u if constant_u >= 0.0 else 1.0 - r_s / r
                if word_to_unit(gate) < u:
                    r = r + 1 if word_to_unit(coin) < 0.5 else r - 1
                    if r < 0:
                        r = 0
                    if r > r_max:
                        r = r_max
                    # an arrival on the last step never gets to dwell
                    if s + half + 1 < steps:
                        visits[r] += 1


@dataclass
class RadialDwellProfile:
    bin_edges: np.ndarray
    dwell_counts: np.ndarray  # walker-steps spent in each bin
    visit_counts: np.ndarray  # arrivals into each bin
    predicted: np.ndarray  # 1/u at bin centres, normalised like dwell_per_visit
    absorbed: int

    @property
    def r_mid(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def dwell_per_visit(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.visit_counts > 0, self.dwell_counts / np.maximum(self.visit_counts, 1), np.nan)

    def csv_rows(self):
        for r, c, p in zip(self.r_mid, self.dwell_counts, self.predicted):
            yield (r, int(c), p)


def radial_migration_mc(
    field: IndeterminacyField,
    start_r: int,
    walkers: int,
    steps: int,
    rng: RngStream,
    r_max: int | None = None,
    constant_u: float | None = None,
) -> RadialDwellProfile:
    """Radial +-1 walks gated by u(r); walkers at r <= r_s stop for good.

    Radii are integers in units of the step length; each site is one bin.
    The walk is reflected at 0 and at ``r_max`` (default 2 * start_r +
    steps).  ``constant_u`` replaces u(r) everywhere outside r_s: 1 is the
    free walk, 0 freezes every walker.  A walker arriving at a site stays
    there a geometric number of steps with mean 1/u, which is what
    ``dwell_per_visit`` measures.
    """
    r_s = float(field.r_s)
    start_r = int(start_r)
    if not start_r > r_s and not (r_s == 0 and start_r >= 0):
        raise ParameterDomainError("start_r must lie outside r_s")
    if constant_u is not None and not 0.0 <= constant_u <= 1.0:
        raise ParameterDomainError("constant_u must lie in [0, 1]")
    if walkers < 1 or steps < 1:
        raise ParameterDomainError("walkers and steps must be >= 1")
    r_max = int(r_max if r_max is not None else 2 * start_r + steps)
    visits = np.zeros(r_max + 1, dtype=np.int64)
    dwell = np.zeros(r_max + 1, dtype=np.int64)
    frozen = np.zeros(walkers, dtype=np.bool_)
    if rng.stream_id >= 1 << 32:
        raise ParameterDomainError("base stream id must fit in 32 bits")
    _radial_kernel(
        np.uint64(rng.seed), np.uint64(rng.stream_id << 32), np.uint64(rng.counter), r_s,
        -1.0 if constant_u is None else float(constant_u), start_r,
        int(steps), r_max, visits, dwell, frozen,
    )
    edges = np.arange(r_max + 2) - 0.5
    mid = np.arange(r_max + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_u = np.where(mid > r_s, 1.0 / (1.0 - r_s / np.where(mid > 0, mid, 1.0)), np.nan) if r_s > 0 else np.ones_like(mid)
    return RadialDwellProfile(edges, dwell, visits, inv_u, int(frozen.sum()))


def dwell_slope(profile: RadialDwellProfile, field: IndeterminacyField, u_band=(0.1, 0.9), min_visits: int = 100):
    """Log-log slope and correlation of dwell-per-visit against 1/u over the band."""
    mid = profile.r_mid
    with np.errstate(divide="ignore", invalid="ignore"):
        u = 1.0 - field.r_s / mid
    dpv = profile.dwell_per_visit
    sel = (u >= u_band[0]) & (u <= u_band[1]) & (profile.visit_counts >= min_visits)
    if sel.sum() < 3:
        raise ParameterDomainError("too few populated bins in the u band")
    x, y = np.log(1.0 / u[sel]), np.log(dpv[sel])
    slope = float(np.polyfit(x, y, 1)[0])
    corr = float(np.corrcoef(x, y)[0, 1])
    return slope, corr


# --- covariant distance -------------------------------------------------------------


def covariant_coordinate(r, r_s: float):
    r = np.asarray(r, dtype=float)
    if np.any(r <= r_s):
        raise CoordinateFrameError("covariant coordinate diverges at r_s")
    return r / (1.0 - r_s / r)


def covariant_distance_demo(r_bar: float, r_s: float, samples: int = 16) -> list[tuple[float, float, float]]:
    """Rows (r, contravariant distance, covariant coordinate) from r_bar down towards r_s.

    Radii approach r_s geometrically: r_k = r_s + (r_bar - r_s) * 10^(-k * 6 / (samples - 1)).
    """
    if not r_bar > r_s:
        raise ParameterDomainError("r_bar must exceed r_s")
    if samples < 2:
        raise ParameterDomainError("samples must be >= 2")
    gaps = (r_bar - r_s) * np.logspace(0, -6, samples)
    radii = r_s + gaps
    return [(float(r), float(r), float(covariant_coordinate(r, r_s))) for r in radii]


def planck_mass_radius(k: float = 2.0) -> tuple[float, float]:
    """(R_s of one Planck mass, Planck length)."""
    units = planck_units()
    return schwarzschild_radius(units.m_p, k), units.l_p
