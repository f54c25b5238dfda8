"""Spreading by repeated convolution, and variance of volume-averaged metric noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal, stats

from .core import ParameterDomainError
from .rng import RngStream

MASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GridDistribution:
    """Point masses at ``support_min + i * width`` for i in range(bin_count)."""

    support_min: float
    width: float
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 1 or m.size == 0:
            raise ParameterDomainError("masses must be a nonempty 1-D array")
        if np.any(m < 0):
            raise ParameterDomainError("masses must be nonnegative")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise ParameterDomainError(f"masses sum to {m.sum()!r}, not 1")
        if not self.width > 0:
            raise ParameterDomainError("bin width must be positive")
        m.flags.writeable = False
        object.__setattr__(self, "masses", m)

    @classmethod
    def from_weights(cls, support_min: float, width: float, weights) -> "GridDistribution":
        w = np.asarray(weights, dtype=float)
        return cls(support_min, width, w / w.sum())

    @property
    def bin_count(self) -> int:
        return self.masses.size

    @property
    def support_max(self) -> float:
        return self.support_min + (self.bin_count - 1) * self.width

    @property
    def centers(self) -> np.ndarray:
        return self.support_min + self.width * np.arange(self.bin_count)

    def moment(self, k: int) -> float:
        return float(np.dot(self.masses, (self.centers - self.mean) ** k))

    @property
    def mean(self) -> float:
        return float(np.dot(self.masses, self.centers))

    @property
    def variance(self) -> float:
        return self.moment(2)

    @property
    def skew(self) -> float:
        return self.moment(3) / self.variance**1.5

    @property
    def excess_kurtosis(self) -> float:
        return self.moment(4) / self.variance**2 - 3.0


def delta(at: float = 0.0, width: float = 1.0) -> GridDistribution:
    return GridDistribution(at, width, np.array([1.0]))


def uniform_grid(low: int, high: int, width: float = 1.0) -> GridDistribution:
    """Uniform over the grid points low*width .. high*width."""
    n = high - low + 1
    return GridDistribution(low * width, width, np.full(n, 1.0 / n))


def gaussian_grid(sigma: float, width: float, span: float = 12.0) -> GridDistribution:
    half = int(math.ceil(span * sigma / width))
    x = width * np.arange(-half, half + 1)
    return GridDistribution.from_weights(-half * width, width, np.exp(-0.5 * (x / sigma) ** 2))


def convolve(d1: GridDistribution, d2: GridDistribution) -> GridDistribution:
    """Distribution of the sum of independent draws from ``d1`` and ``d2``."""
    if not math.isclose(d1.width, d2.width, rel_tol=1e-12):
        raise ParameterDomainError(f"bin widths differ: {d1.width} vs {d2.width}")
    out = signal.fftconvolve(d1.masses, d2.masses) if min(d1.bin_count, d2.bin_count) > 64 else np.convolve(d1.masses, d2.masses)
    out = np.clip(out, 0.0, None)
    return GridDistribution(d1.support_min + d2.support_min, d1.width, out / out.sum())


@dataclass
class SpreadResult:
    variance_series: np.ndarray  # variance after 1..n steps
    final: GridDistribution
    skew: float
    excess_kurtosis: float
    slope: float  # least-squares slope of variance against step count, in units of Var(D1)
    skew_series: np.ndarray = None
    kurtosis_series: np.ndarray = None

    @property
    def spread_series(self) -> np.ndarray:
        return np.sqrt(self.variance_series)

    def csv_rows(self):
        for n, row in enumerate(zip(self.variance_series, self.skew_series, self.kurtosis_series), start=1):
            yield (n, *row)


def iterated_spread(d1: GridDistribution, n: int) -> SpreadResult:
    """n-fold self-convolution of ``d1``.

    The support grows with every step (the grid simply extends), so no tail
    mass is ever dropped.
    """
    if n < 1:
        raise ParameterDomainError("n must be >= 1")
    if not d1.variance > 0:
        raise ParameterDomainError("d1 must have positive variance")
    current = d1
    moments = [(d1.variance, d1.skew, d1.excess_kurtosis)]
    for _ in range(n - 1):
        current = convolve(current, d1)
        moments.append((current.variance, current.skew, current.excess_kurtosis))
    variances, skews, kurts = (np.array(col) for col in zip(*moments))
    steps = np.arange(1, n + 1)
    slope = float(np.polyfit(steps, variances / d1.variance, 1)[0]) if n >= 2 else 1.0
    return SpreadResult(variances, current, current.skew, current.excess_kurtosis, slope, skews, kurts)


# --- volume averaging ---------------------------------------------------------------

DISTRIBUTIONS = ("normal", "uniform", "bimodal")


@dataclass(frozen=True)
class MetricFluctuationSpec:
    sigma: float = 1.0
    distribution: str = "normal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterDomainError("sigma must be positive")
        if self.distribution not in DISTRIBUTIONS:
            raise ParameterDomainError(f"distribution must be one of {DISTRIBUTIONS}")

    def sample(self, n: int, rng: RngStream) -> tuple[np.ndarray, RngStream]:
        """n zero-mean values with standard deviation sigma."""
        if self.distribution == "normal":
            x, rng = rng.normals(n)
        elif self.distribution == "uniform":
            u, rng = rng.uniforms(n)
            x = (2 * u - 1) * math.sqrt(3.0)
        else:
            # symmetric mixture of N(+-0.8, 0.6^2); variance 0.64 + 0.36 = 1
            z, rng = rng.normals(n)
            u, rng = rng.uniforms(n)
            x = np.where(u < 0.5, -0.8, 0.8) + 0.6 * z
        return self.sigma * x, rng


def volume_averages(spec: MetricFluctuationSpec, m: int, samples: int, rng: RngStream) -> np.ndarray:
    """``samples`` means of m iid components; sample j uses stream (seed, (stream << 32) + j)."""
    out = np.empty(samples)
    base = rng.stream_id << 32
    for j in range(samples):
        x, _ = spec.sample(m, RngStream(rng.seed, base + j, rng.counter))
        out[j] = x.mean()
    return out


def metric_average_variance(
    spec: MetricFluctuationSpec, m_points, samples: int, rng: RngStream
) -> tuple[list[tuple[int, float]], float]:
    """Empirical variance of the m-cell average for each m, and the log-log slope."""
    m_points = [int(m) for m in m_points]
    if not m_points or min(m_points) < 1:
        raise ParameterDomainError("m_points must be nonempty positive counts")
    if samples < 1000:
        raise ParameterDomainError("samples must be >= 1000")
    rows = []
    for i, m in enumerate(m_points):
        avg = volume_averages(spec, m, samples, rng.spawn(i + 1))
        rows.append((m, float(avg.var(ddof=1))))
    slope = float(np.polyfit(np.log([m for m, _ in rows]), np.log([v for _, v in rows]), 1)[0]) if len(rows) > 1 else float("nan")
    return rows, slope


@dataclass(frozen=True)
class UncertaintyRecord:
    volume: float
    delta_q: float
    delta_g: float
    p_cov: float

    @property
    def product(self) -> float:
        return self.delta_q * self.p_cov * self.delta_g


def uncertainty_product(
    spec: MetricFluctuationSpec,
    p_cov: float,
    volumes,
    rng: RngStream,
    cells_per_volume: int = 16,
    samples: int = 4000,
) -> list[UncertaintyRecord]:
    """Position spread against the spread of the volume-averaged metric component.

    A volume V holds ``cells_per_volume * V`` independent cells and
    Delta q = V.  Delta g is the variance of the cell average: the product
    Delta q * p * Delta g is then independent of V, while the standard
    deviation of the average would leave a factor sqrt(V).
    """
    volumes = [float(v) for v in volumes]
    if not volumes or min(volumes) <= 0:
        raise ParameterDomainError("volumes must be positive")
    records = []
    for i, v in enumerate(volumes):
        m = max(1, int(round(cells_per_volume * v)))
        avg = volume_averages(spec, m, samples, rng.spawn(i + 1))
        records.append(UncertaintyRecord(v, v, float(avg.var(ddof=1)), float(p_cov)))
    return records


def normality(values) -> tuple[float, float]:
    """Sample skewness and excess kurtosis."""
    values = np.asarray(values, dtype=float)
    return float(stats.skew(values)), float(stats.kurtosis(values))
