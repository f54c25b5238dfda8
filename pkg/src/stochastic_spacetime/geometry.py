"""Finite-difference differential geometry for complex metric fields.

Metric fields are evaluated holomorphically: coordinates may be complex and
all derivatives are plain central differences along real coordinate steps.
Nothing here tries to give complex Christoffel symbols a physical meaning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .core import (
    ConventionCalibrationError,
    IllConditionedProbeError,
    ParameterDomainError,
    SingularMetricError,
)
from .metric_algebra import PlaneWavePhase, det4, plane_wave_metric
from .rng import RngStream, coin

if TYPE_CHECKING:
    from .stochastic_walk import WalkConfig

STEP_FRACTION = 1e-4
SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class MetricField:
    """A metric as a function of the four coordinates (x, y, z, t).

    ``evaluator`` receives a length-4 complex array and returns a Metric4 or
    anything ``np.asarray`` turns into a 4x4 matrix.
    """

    evaluator: Callable[[np.ndarray], object]
    smoothness_scale: float = 1.0

    def __post_init__(self):
        if not self.smoothness_scale > 0:
            raise ParameterDomainError("smoothness_scale must be positive")

    @classmethod
    def from_zt(cls, fn: Callable[[complex, complex], object], smoothness_scale: float = 1.0):
        """Wrap an evaluator of (z, t) only."""
        return cls(lambda x: fn(x[2], x[3]), smoothness_scale)

    @property
    def step(self) -> float:
        return self.smoothness_scale * STEP_FRACTION

    def metric(self, x) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=np.complex128)), dtype=np.complex128)


def constant_field(g) -> MetricField:
    g = np.asarray(g, dtype=np.complex128)
    return MetricField(lambda x: g)


def minkowski_field() -> MetricField:
    return constant_field(np.diag([1.0, 1.0, 1.0, -1.0]))


def plane_wave_field(k: float, omega: float) -> MetricField:
    scale = 1.0 / max(abs(k), abs(omega))
    return MetricField.from_zt(lambda z, t: plane_wave_metric(PlaneWavePhase(k, omega, z, t)), scale)


def perturbed_field(k: float, omega: float, b: float) -> MetricField:
    if abs(b) >= 1.0:
        from .core import PerturbationRegimeError

        raise PerturbationRegimeError(f"|b| must be < 1, got {b}")
    scale = 1.0 / max(abs(k), abs(omega))

    def evaluate(x):
        e = np.exp(1j * (k * x[2] - omega * x[3]))
        return np.diag([1 + b / e, 1 + b / e, 1 + b * e, -1 - b * e])

    return MetricField(evaluate, scale)


def _point(args) -> np.ndarray:
    if len(args) == 1:
        x = np.asarray(args[0], dtype=np.complex128)
    elif len(args) == 2:
        x = np.array([0.0, 0.0, args[0], args[1]], dtype=np.complex128)
    else:
        x = np.asarray(args, dtype=np.complex128)
    if x.shape != (4,):
        raise ParameterDomainError("a point is (z, t) or four coordinates")
    return x


@dataclass(frozen=True)
class ChristoffelSet:
    gamma: np.ndarray  # gamma[l, m, n] = Gamma^l_{mn}
    richardson_ratio: float | None = None

    def __array__(self, dtype=None, copy=None):
        return self.gamma if dtype is None else self.gamma.astype(dtype)


def metric_derivatives(field: MetricField, x, h: float | None = None) -> np.ndarray:
    """dg[s, m, n] = d g_{mn} / d x^s by central differences."""
    h = field.step if h is None else h
    x = np.asarray(x, dtype=np.complex128)
    dg = np.empty((4, 4, 4), dtype=np.complex128)
    for s in range(4):
        e = np.zeros(4)
        e[s] = h
        dg[s] = (field.metric(x + e) - field.metric(x - e)) / (2 * h)
    return dg


def christoffel_from(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    if abs(det4(g)) <= SINGULAR_TOL:
        raise SingularMetricError("metric is singular; Christoffel symbols do not exist")
    ginv = np.linalg.inv(g)
    lower = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg  # [s, m, n]
    return 0.5 * np.einsum("ls,smn->lmn", ginv, lower)


def _gamma(field: MetricField, x, h=None) -> np.ndarray:
    return christoffel_from(field.metric(x), metric_derivatives(field, x, h))


def richardson_ratio(estimate: Callable[[float], np.ndarray], h: float) -> float:
    """|D(h) - D(h/2)| / |D(h/2) - D(h/4)|; about 4 for a second-order scheme."""
    d1, d2, d4 = estimate(h), estimate(h / 2), estimate(h / 4)
    num = np.abs(d1 - d2).max()
    den = np.abs(d2 - d4).max()
    return float(num / den) if den > 0 else math.inf


def christoffel(field: MetricField, *point, verify: bool = False) -> ChristoffelSet:
    """Gamma^l_{mn} at ``point`` ((z, t) or four coordinates).

    With ``verify`` the Richardson ratio of the scheme is measured from a
    coarser step (1e-2 of the smoothness scale) and stored on the result.
    """
    x = _point(point)
    gamma = _gamma(field, x)
    ratio = None
    if verify:
        ratio = richardson_ratio(lambda h: _gamma(field, x, h), field.smoothness_scale * 1e-2)
    return ChristoffelSet(gamma, ratio)


# --- Ricci ---------------------------------------------------------------------

# Overall sign relative to
#   R_mn = d_l G^l_mn - d_n G^l_ml + G^l_ls G^s_mn - G^l_ns G^s_ml.
CONVENTIONS = {"standard": 1.0, "opposite": -1.0}
_CALIBRATED: dict = {}


def _ricci_raw(field: MetricField, x, h=None) -> np.ndarray:
    h = field.step if h is None else h
    gam = _gamma(field, x, h)
    dgam = np.empty((4, 4, 4, 4), dtype=np.complex128)
    for s in range(4):
        e = np.zeros(4)
        e[s] = h
        dgam[s] = (_gamma(field, x + e, h) - _gamma(field, x - e, h)) / (2 * h)
    return (
        np.einsum("llmn->mn", dgam)
        - np.einsum("nlml->mn", dgam)
        + np.einsum("lls,smn->mn", gam, gam)
        - np.einsum("lns,sml->mn", gam, gam)
    )


def calibrate_convention(k: float = 1.3, omega: float = 0.7) -> str:
    """Pick the Ricci sign that gives R_zt = -3 k omega / 2 on the plane-wave metric."""
    key = (k, omega)
    if key in _CALIBRATED:
        return _CALIBRATED[key]
    x = np.array([0.0, 0.0, 0.37, 0.21])
    raw = _ricci_raw(plane_wave_field(k, omega), x)[2, 3]
    target = -1.5 * k * omega
    for name, sign in CONVENTIONS.items():
        if abs(sign * raw - target) < 1e-5 * abs(target):
            _CALIBRATED[key] = name
            return name
    raise ConventionCalibrationError(f"neither sign reproduces R_zt = {target}; raw value {raw}")


def ricci(field: MetricField, *point, convention: str | None = None) -> np.ndarray:
    """Ricci tensor R_mn by nested central differences."""
    name = convention or calibrate_convention()
    if name not in CONVENTIONS:
        raise ParameterDomainError(f"unknown convention {name!r}")
    return CONVENTIONS[name] * _ricci_raw(field, _point(point))


def plane_wave_ricci_reference(k, omega, z, t) -> dict[str, complex]:
    a = k * z - omega * t
    return {
        "xx": np.exp(-2j * a) * (k * k - omega * omega) / 2,
        "yy": np.exp(-2j * a) * (k * k - omega * omega) / 2,
        "zz": k * k + omega * omega / 2,
        "tt": omega * omega + k * k / 2,
        "zt": -1.5 * k * omega,
    }


def first_order_coefficient(
    field_of_b: Callable[[float], MetricField], point, component: tuple[int, int], b: float = 1e-3
) -> complex:
    """d R_component / d b at b = 0 from runs at b and b/2.

    R(b) = c1 b + c2 b^2 + ..., so (4 R(b/2) - R(b)) / b = c1 + O(b^2).
    """
    m, n = component
    r1 = ricci(field_of_b(b), point)[m, n]
    r2 = ricci(field_of_b(b / 2), point)[m, n]
    r0 = ricci(field_of_b(0.0), point)[m, n]
    return complex((4 * (r2 - r0) - (r1 - r0)) / b)


# --- geodesics ---------------------------------------------------------------------


@dataclass(frozen=True)
class GeodesicState:
    position: np.ndarray
    velocity: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.complex128))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=np.complex128))


@dataclass
class Trajectory:
    s: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    diagnostic: str | None = None

    @property
    def final(self) -> GeodesicState:
        return GeodesicState(self.positions[-1], self.velocities[-1], float(self.s[-1]))

    def csv_rows(self):
        for s, x, v in zip(self.s, self.positions.real, self.velocities.real):
            yield (s, *x, *v)


CSV_HEADER = ("s", "x", "y", "z", "t", "vx", "vy", "vz", "vt")


def _acceleration(gamma, v):
    return -np.einsum("lmn,m,n->l", gamma, v, v)


def _rk4(field, x, v, ds, extra=None):
    def acc(xp, vp):
        gam = _gamma(field, xp)
        if extra is not None:
            gam = gam + extra(xp)
        return _acceleration(gam, vp)

    k1x, k1v = v, acc(x, v)
    k2x, k2v = v + 0.5 * ds * k1v, acc(x + 0.5 * ds * k1x, v + 0.5 * ds * k1v)
    k3x, k3v = v + 0.5 * ds * k2v, acc(x + 0.5 * ds * k2x, v + 0.5 * ds * k2v)
    k4x, k4v = v + ds * k3v, acc(x + ds * k3x, v + ds * k3v)
    return (
        x + ds / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
        v + ds / 6 * (k1v + 2 * k2v + 2 * k3v + k4v),
    )


def _fluctuation_gamma(g, dg_noise):
    ginv = np.linalg.inv(g)
    lower = dg_noise.transpose(1, 0, 2) + dg_noise.transpose(1, 2, 0) - dg_noise
    return 0.5 * np.einsum("ls,smn->lmn", ginv, lower)


def geodesic_integrate(
    field: MetricField,
    start: GeodesicState,
    steps: int,
    ds: float,
    stochastic: "WalkConfig | None" = None,
    rng: RngStream | None = None,
) -> Trajectory:
    """Fixed-step RK4 integration of x'' = -Gamma(x', x').

    In stochastic mode each step first flips an indeterminacy coin; on heads
    the metric is perturbed by a random gradient field (every d_s g_mn drawn
    normal with standard deviation ``stochastic.metric_fluctuation``) and the
    position update uses the perturbed Christoffels.  The velocity keeps its
    unperturbed update, so kicks do not accumulate into drift and the
    position spread grows like a Wiener process.
    """
    if steps < 0:
        raise ParameterDomainError("steps must be nonnegative")
    if stochastic is not None and rng is None:
        raise ParameterDomainError("a stochastic run needs an RngStream")
    x, v, s = start.position.copy(), start.velocity.copy(), start.s
    xs, vs, ss = [x], [v], [s]
    diagnostic = None
    iu = np.triu_indices(4)
    for _ in range(steps):
        try:
            if stochastic is None:
                x, v = _rk4(field, x, v, ds)
            else:
                migrate, rng = coin(rng, stochastic.indeterminacy)
                noise, rng = rng.normals(40)
                xn, vn = _rk4(field, x, v, ds)
                if migrate:
                    dg = np.zeros((4, 4, 4))
                    for sidx in range(4):
                        block = np.zeros((4, 4))
                        block[iu] = noise[10 * sidx : 10 * sidx + 10]
                        dg[sidx] = block + np.triu(block, 1).T
                    dgam = _fluctuation_gamma(field.metric(x), stochastic.metric_fluctuation * dg)
                    xn, _ = _rk4(field, x, v, ds, extra=lambda _x: dgam)
                x, v = xn, vn
        except SingularMetricError as exc:
            diagnostic = f"stopped at s={s:.6g}: {exc}"
            break
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            diagnostic = f"stopped at s={s:.6g}: non-finite state"
            break
        s = s + ds
        xs.append(x)
        vs.append(v)
        ss.append(s)
    return Trajectory(np.array(ss), np.array(xs), np.array(vs), diagnostic)


def norm_along(field: MetricField, traj: Trajectory) -> np.ndarray:
    """g(x', x') at every recorded point."""
    return np.array([v @ field.metric(x) @ v for x, v in zip(traj.positions, traj.velocities)])


# --- volume evolution -----------------------------------------------------------------


@dataclass(frozen=True)
class VolumeProbe:
    """A geodesic bundle around ``position`` moving along ``T``.

    ``tau`` is the half-width of the proper-time window used for the second
    derivative, ``epsilon`` the bundle size as a fraction of the field's
    smoothness scale, ``substeps`` the RK4 steps per half-window.
    """

    position: np.ndarray
    T: np.ndarray
    tau: float = 0.2
    epsilon: float = 1e-3
    substeps: int = 8

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.complex128))
        object.__setattr__(self, "T", np.asarray(self.T, dtype=np.complex128))
        if not (self.tau > 0 and self.epsilon > 0 and self.substeps >= 1):
            raise ParameterDomainError("tau, epsilon and substeps must be positive")


@dataclass
class VolumeTerms:
    lhs: complex
    rhs: complex
    flat: complex
    o: complex
    tidal_scale: float
    residual: float


def _unit_tangent(g, T):
    norm = T @ g @ T
    return T / np.sqrt(-norm + 0j)


def _bundle_volumes(field: MetricField, probe: VolumeProbe, gamma_at_start: np.ndarray):
    """Four-volume o and deviation lengths at tau = -2d, -d, 0, d, 2d with d = tau / 2."""
    x0 = probe.position
    g0 = field.metric(x0)
    T = _unit_tangent(g0, probe.T)
    eps = probe.epsilon * field.smoothness_scale
    basis = []
    for a in range(3):
        e = np.zeros(4, dtype=np.complex128)
        e[a] = 1.0
        e = e - (e @ g0 @ T) / (T @ g0 @ T) * T
        for prev in basis:
            e = e - (e @ g0 @ prev) / (prev @ g0 @ prev) * prev
        basis.append(e * eps / np.sqrt(abs(e @ g0 @ e)))
    n = 2 * probe.substeps
    ds = probe.tau / n

    def run(x, v):
        fwd = geodesic_integrate(field, GeodesicState(x, v), n, ds)
        bwd = geodesic_integrate(field, GeodesicState(x, v), n, -ds)
        if fwd.diagnostic or bwd.diagnostic:
            raise IllConditionedProbeError(fwd.diagnostic or bwd.diagnostic)
        idx = [n, n // 2]
        return (
            np.concatenate([bwd.positions[idx], [x], fwd.positions[[n // 2, n]]]),
            np.concatenate([bwd.velocities[idx], [v], fwd.velocities[[n // 2, n]]]),
        )

    centre_x, centre_v = run(x0, T)
    deviations = []
    for xi in basis:
        dv = np.einsum("lmn,m,n->l", gamma_at_start, xi, T)
        plus, _ = run(x0 + xi, T - dv)
        minus, _ = run(x0 - xi, T + dv)
        deviations.append((plus - minus) / 2)
    # two more geodesics shifted along T complete the bundle; their
    # deviation is T itself to first order
    along_p, _ = run(x0 + eps * T, T)
    along_m, _ = run(x0 - eps * T, T)
    along = (along_p - along_m) / (2 * eps)

    vols, lengths = [], []
    for j in range(5):
        g = field.metric(centre_x[j])
        xi_mat = np.stack([deviations[0][j], deviations[1][j], deviations[2][j], along[j]], axis=1)
        gram = xi_mat.T @ g @ xi_mat
        vols.append(np.sqrt(-det4(gram) + 0j))
        lengths.append([np.sqrt(abs(d[j] @ g @ d[j])) for d in deviations])
    return np.array(vols), np.array(lengths), T


def _second_derivative(values, d):
    """Richardson-extrapolated central second derivative at the middle sample."""
    coarse = (values[4] - 2 * values[2] + values[0]) / (2 * d) ** 2
    fine = (values[3] - 2 * values[2] + values[1]) / d**2
    return (4 * fine - coarse) / 3


def volume_evolution_terms(
    field: MetricField, probe: VolumeProbe, flat_field: MetricField | None = None
) -> VolumeTerms:
    """Both sides of o'' - o''_flat = -o R(T, T) for a small geodesic bundle.

    Deviation vectors start orthogonal to T with zero covariant derivative, so
    the identity holds at tau = 0.  The residual is
    |LHS - RHS| / max(|LHS|, |RHS|, o * tidal, o * 1e-3), where ``tidal`` is
    the sum over deviation axes of |d^2 ln|xi| / d tau^2|; it measures the
    mismatch against the size of the individual tidal terms that have to
    cancel in a Ricci-flat region.
    """
    x0 = probe.position
    gam0 = _gamma(field, x0)
    vols, lengths, T = _bundle_volumes(field, probe, gam0)
    o = vols[2]
    if abs(o) == 0 or np.min(np.abs(vols)) < 1e-18 * abs(o):
        raise IllConditionedProbeError("bundle volume collapsed")
    d = probe.tau / 2
    lhs = _second_derivative(vols, d)
    flat_field = minkowski_field() if flat_field is None else flat_field
    flat_probe = VolumeProbe(x0, _unit_tangent(flat_field.metric(x0), T), probe.tau, probe.epsilon, probe.substeps)
    fvols, _, _ = _bundle_volumes(
        MetricField(flat_field.evaluator, field.smoothness_scale), flat_probe, _gamma(flat_field, x0)
    )
    flat = _second_derivative(fvols, d) * (o / fvols[2])
    lhs = lhs - flat
    r = ricci(field, x0)
    rhs = -o * (T @ r @ T)
    tidal = float(sum(abs(_second_derivative(np.log(lengths[:, a]), d)) for a in range(3)))
    denom = max(abs(lhs), abs(rhs), abs(o) * tidal, abs(o) * 1e-3)
    return VolumeTerms(lhs, rhs, flat, o, tidal, float(abs(lhs - rhs) / denom))


def volume_evolution_residual(field: MetricField, probe: VolumeProbe, flat_field: MetricField | None = None) -> float:
    return volume_evolution_terms(field, probe, flat_field).residual
