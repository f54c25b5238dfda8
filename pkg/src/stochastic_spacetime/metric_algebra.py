"""Complex 4x4 metric algebra.

Metrics here are symmetric complex 4x4 matrices.  The determinant gives the
(un-normalised) probability density sqrt(-det g); superposition is the
probability-weighted entrywise sum; a coordinate change W acts by congruence
G -> W^T G W.  The module also carries the named metrics used throughout the
toolkit: the 1976 two-slit metric, the 2016 plane-wave metric, its
background-perturbed form, and the eight real singular F metrics together with
their coordinate tables.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    CoordinateFrameError,
    NonphysicalDeterminantError,
    ParameterDomainError,
    PerturbationRegimeError,
    SingularTransformError,
)

DEFAULT_LABELS = ("x", "y", "z", "t")
SYMMETRY_TOL = 1e-12
REAL_TOL = 1e-12
DENSITY_IMAG_TOL = 1e-9

VARIANTS = ("two_slit_1976", "plane_wave_2016")


@dataclass(frozen=True, eq=False)
class Metric4:
    """Symmetric complex 4x4 metric with coordinate labels.

    Asymmetric input is replaced by (M + M^T)/2, with a warning when the
    asymmetry exceeds 1e-12.
    """

    entries: np.ndarray
    coordinate_labels: tuple[str, str, str, str] = DEFAULT_LABELS

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.complex128)
        if m.shape != (4, 4):
            raise ParameterDomainError(f"metric must be 4x4, got shape {m.shape}")
        asym = np.abs(m - m.T).max()
        if asym > 0.0:
            if asym > SYMMETRY_TOL:
                warnings.warn(f"metric asymmetry {asym:.3e} removed by symmetrisation", stacklevel=3)
            m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "coordinate_labels", tuple(self.coordinate_labels))

    @property
    def is_real(self) -> bool:
        return bool(np.abs(self.entries.imag).max() < REAL_TOL)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def allclose(self, other, atol=1e-12) -> bool:
        return bool(np.allclose(self.entries, np.asarray(other), rtol=0.0, atol=atol))

    def to_json(self) -> str:
        pairs = [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]
        return json.dumps({"coordinate_labels": list(self.coordinate_labels), "entries": pairs})

    @classmethod
    def from_json(cls, text: str) -> "Metric4":
        doc = json.loads(text)
        arr = np.array([[complex(re_, im) for re_, im in row] for row in doc["entries"]])
        return cls(arr, tuple(doc["coordinate_labels"]))


@dataclass(frozen=True)
class PlaneWavePhase:
    k: float
    omega: float
    z: complex = 0.0
    t: complex = 0.0

    @property
    def alpha(self):
        return self.k * self.z - self.omega * self.t


@dataclass
class MetricMixture:
    components: list[tuple[float, Metric4]] = field(default_factory=list)

    def __post_init__(self):
        if not self.components:
            raise ParameterDomainError("a mixture needs at least one component")
        weights = np.array([w for w, _ in self.components], dtype=float)
        if np.any(weights < 0.0) or np.any(weights > 1.0):
            raise ParameterDomainError("mixture weights must lie in [0, 1]")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ParameterDomainError(f"mixture weights sum to {weights.sum()!r}, not 1")


def _phase(phase) -> complex:
    return phase.alpha if isinstance(phase, PlaneWavePhase) else phase


def det4(m) -> complex | np.ndarray:
    """Determinant of one 4x4 matrix or a stack (..., 4, 4).

    Laplace expansion along the first two rows (complementary 2x2 minors);
    no pivoting, so it is exact up to the rounding of 24 products.
    """
    a = np.asarray(m, dtype=np.complex128)

    def minor(r0, r1, c0, c1):
        return a[..., r0, c0] * a[..., r1, c1] - a[..., r0, c1] * a[..., r1, c0]

    cols = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    total = 0
    for c0, c1 in cols:
        rest = tuple(c for c in range(4) if c not in (c0, c1))
        sign = (-1) ** (c0 + c1 + 1)  # rows (0, 1): (-1)^(0+1+c0+c1)
        total = total + sign * minor(0, 1, c0, c1) * minor(2, 3, *rest)
    return total


def probability_density(m: Metric4) -> float:
    """sqrt(-det g): the determinant-based probability density."""
    d = complex(det4(m.entries if isinstance(m, Metric4) else m))
    if d.real > 0.0 or abs(d.imag) >= DENSITY_IMAG_TOL:
        raise NonphysicalDeterminantError(d)
    return float(np.sqrt(-d.real))


def superpose(mix: MetricMixture | Sequence[tuple[float, Metric4]]) -> Metric4:
    if not isinstance(mix, MetricMixture):
        mix = MetricMixture(list(mix))
    labels = mix.components[0][1].coordinate_labels
    total = np.zeros((4, 4), dtype=np.complex128)
    for weight, metric in mix.components:
        if metric.coordinate_labels != labels:
            raise CoordinateFrameError(
                f"cannot superpose metrics in frames {labels} and {metric.coordinate_labels}"
            )
        total += weight * metric.entries
    return Metric4(total, labels)


def minkowski() -> Metric4:
    return Metric4(np.diag([1.0, 1.0, 1.0, -1.0]))


def two_slit_metric(alpha) -> Metric4:
    """diag(1, 1, e^{i alpha}, -e^{-i alpha}): the 1976 single-slit metric."""
    e = np.exp(1j * _phase(alpha))
    return Metric4(np.diag([1.0, 1.0, e, -1.0 / e]))


def plane_wave_metric(phase) -> Metric4:
    """diag(e^{-i a}, e^{-i a}, e^{i a}, -e^{i a}) with a = k z - omega t."""
    e = np.exp(1j * _phase(phase))
    return Metric4(np.diag([1.0 / e, 1.0 / e, e, -e]))


def perturbed_metric(phase, b: float) -> Metric4:
    """Minkowski background plus b times the plane-wave metric."""
    if abs(b) >= 1.0:
        raise PerturbationRegimeError(f"|b| must be < 1, got {b}")
    e = np.exp(1j * _phase(phase))
    return Metric4(np.diag([1 + b / e, 1 + b / e, 1 + b * e, -1 - b * e]))


_METRIC_BUILDERS = {"two_slit_1976": two_slit_metric, "plane_wave_2016": plane_wave_metric}


def variant_metric(variant: str, alpha) -> Metric4:
    try:
        return _METRIC_BUILDERS[variant](alpha)
    except KeyError:
        raise ParameterDomainError(f"unknown variant {variant!r}; choose from {VARIANTS}") from None


def interference_pattern(alpha_grid, beta: float, variant: str = "plane_wave_2016"):
    """Density of the equal-weight superposition of the metrics at phases alpha and beta.

    Every value comes from a 4x4 determinant; the closed forms are
    |cos((alpha-beta)/2)| for the 1976 variant and cos^2((alpha-beta)/2) for 2016.
    """
    alphas = [float(a) for a in alpha_grid]
    if not alphas:
        raise ParameterDomainError("alpha grid is empty")
    other = variant_metric(variant, beta)
    rows = []
    for a in alphas:
        mixed = superpose([(0.5, variant_metric(variant, a)), (0.5, other)])
        rows.append((a, probability_density(mixed)))
    return rows


# Prefactor 1/2 sometimes quoted for the two-slit density; the determinant gives none.
LEGACY_TWO_SLIT_PREFACTOR = 0.5


def congruence_transform(g: Metric4, w) -> Metric4:
    """G' = W^T G W."""
    w = np.asarray(w, dtype=np.complex128)
    if abs(det4(w)) <= 1e-12:
        raise SingularTransformError("transformation matrix is singular")
    out = w.T @ np.asarray(g.entries if isinstance(g, Metric4) else g) @ w
    labels = g.coordinate_labels if isinstance(g, Metric4) else DEFAULT_LABELS
    return Metric4(out, labels)


_R2 = 1.0 / np.sqrt(2.0)
W_ZT = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, -1j * _R2, _R2],
        [0, 0, _R2, -1j * _R2],
    ],
    dtype=np.complex128,
)


def w_zt_block(alpha) -> np.ndarray:
    """The real z,t block W^T g W = [[-cos a, sin a], [sin a, cos a]]."""
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[-c, s], [s, c]])


# --- the F catalogue -------------------------------------------------------

# Each F matrix is written as integer multiples of (C, S) = (cos a, sin a):
# entry = cC * C + cS * S.
_F_PATTERNS = {
    "F1": ([[2, 0, -2, 0], [0, 2, 2, 0], [-2, 2, 4, 0], [0, 0, 0, -4]],
           [[0, 0, 0, 2], [0, 0, 0, 2], [0, 0, 0, 0], [2, 2, 0, 0]]),
    "F2": ([[2, 0, -2, 0], [0, 2, -2, 0], [-2, -2, 4, 0], [0, 0, 0, -4]],
           [[0, 0, 0, 2], [0, 0, 0, -2], [0, 0, 0, 0], [2, -2, 0, 0]]),
    "F3": ([[2, 0, 2, 0], [0, 2, 2, 0], [2, 2, 4, 0], [0, 0, 0, -4]],
           [[0, 0, 0, -2], [0, 0, 0, 2], [0, 0, 0, 0], [-2, 2, 0, 0]]),
    "F4": ([[2, 0, 2, 0], [0, 2, -2, 0], [2, -2, 4, 0], [0, 0, 0, -4]],
           [[0, 0, 0, -2], [0, 0, 0, -2], [0, 0, 0, 0], [-2, -2, 0, 0]]),
    "F5": ([[2, 0, 2, 0], [0, 2, -2, 0], [2, -2, 4, 0], [0, 0, 0, -4]],
           [[0, 0, 0, 2], [0, 0, 0, 2], [0, 0, 0, 0], [2, 2, 0, 0]]),
    "F6": ([[2, 0, -2, 0], [0, 2, -2, 0], [-2, -2, 4, 0], [0, 0, 0, -4]],
           [[0, 0, 0, -2], [0, 0, 0, 2], [0, 0, 0, 0], [-2, 2, 0, 0]]),
    "F7": ([[2, 0, 2, 0], [0, 2, 2, 0], [2, 2, 4, 0], [0, 0, 0, -4]],
           [[0, 0, 0, 2], [0, 0, 0, -2], [0, 0, 0, 0], [2, -2, 0, 0]]),
    "F8": ([[2, 0, -2, 0], [0, 2, 2, 0], [-2, 2, 4, 0], [0, 0, 0, -4]],
           [[0, 0, 0, -2], [0, 0, 0, -2], [0, 0, 0, 0], [-2, -2, 0, 0]]),
}

# Coordinate tables (x', y', z', t') for F1..F8.
F_TABLES = {
    "F1": ("-x+z-it", "-y-z-it", "x-z-it", "iy+iz+t"),
    "F2": ("-x+z-it", "-y+z+it", "x-z-it", "-iy+iz+t"),
    "F3": ("-x-z+it", "-y-z-it", "-x-z-it", "iy+iz+t"),
    "F4": ("-x-z+it", "-y+z+it", "-x-z-it", "-iy+iz+t"),
    "F5": ("-x-z-it", "-y+z-it", "y-z-it", "ix+iz+t"),
    "F6": ("-x+z+it", "-y+z-it", "y-z-it", "-ix+iz+t"),
    "F7": ("-x-z-it", "-y-z+it", "-y-z-it", "ix+iz+t"),
    "F8": ("-x+z+it", "-y-z+it", "-y-z-it", "-ix+iz+t"),
}


@dataclass(frozen=True)
class FMetric:
    name: str
    cos_coefficients: np.ndarray
    sin_coefficients: np.ndarray
    table: tuple[str, str, str, str]

    def __call__(self, alpha) -> Metric4:
        m = self.cos_coefficients * np.cos(alpha) + self.sin_coefficients * np.sin(alpha)
        return Metric4(m.astype(np.complex128))

    @property
    def transform(self) -> np.ndarray:
        return parse_transform_table(self.table)


def f_metric_catalog() -> list[FMetric]:
    return [
        FMetric(name, np.array(cc, dtype=float), np.array(ss, dtype=float), F_TABLES[name])
        for name, (cc, ss) in _F_PATTERNS.items()
    ]


_TERM = re.compile(r"([+-]?)(i?)([xyzt])")


def parse_transform_table(table: Sequence[str]) -> np.ndarray:
    """Rows of A for X' = A X from strings like ``"-x+z-it"``."""
    a = np.zeros((4, 4), dtype=np.complex128)
    for row, expr in enumerate(table):
        expr = expr.replace(" ", "")
        matched = "".join(m.group(0) for m in _TERM.finditer(expr))
        if matched != expr:
            raise ParameterDomainError(f"cannot parse coordinate expression {expr!r}")
        for sign, imag, var in _TERM.findall(expr):
            value = (-1 if sign == "-" else 1) * (1j if imag else 1)
            a[row, "xyzt".index(var)] += value
    return a


MetricFunction = Callable[[float], Metric4]
