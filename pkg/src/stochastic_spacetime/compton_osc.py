"""Sequence-time oscillation of a mass and its spectral detectability."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import optimize, signal

from .core import (
    C_LIGHT,
    H_PLANCK,
    BracketFailureError,
    ParameterDomainError,
    planck_units,
)
from .rng import RngStream, draw_words, word_to_unit

DEFAULT_SNR = 5.0
# Legacy figures that direct evaluation does not reproduce; kept for reporting.
LEGACY_PROTON_T_BAR = 1.45e35
LEGACY_UNIT_T_BAR_MASS = 2.43e-8


def t_bar_of_mass(m: float, axes: int = 3, planck_pi: bool = False, units=None) -> float:
    """Half-period of the sequence-time oscillation, in Planck times.

    T = h / (2 * axes * m c^2 t_p).  With ``planck_pi`` the pi inside h = 2 pi hbar
    is replaced by 3, which turns T(m_p) = pi/3 into exactly 1.
    """
    if not m > 0:
        raise ParameterDomainError("mass must be positive")
    if axes not in (1, 3):
        raise ParameterDomainError("axes must be 1 or 3")
    units = units or planck_units()
    h = H_PLANCK
    if planck_pi:
        h = h / math.pi * units.pi_p
    return h / (2 * axes * m * C_LIGHT**2 * units.t_p)


def mass_of_t_bar(t_bar: float, axes: int = 3, units=None) -> float:
    units = units or planck_units()
    return H_PLANCK / (2 * axes * t_bar * C_LIGHT**2 * units.t_p)


@dataclass(frozen=True)
class OscillationConfig:
    t_bar: float
    angle_measure: float = 1.0
    axes: int = 3
    steps: int = 4096
    rng: RngStream = RngStream(0)
    simultaneous: bool = False

    def __post_init__(self):
        if not self.t_bar > 0:
            raise ParameterDomainError("t_bar must be positive")
        if not 0.0 <= self.angle_measure <= 1.0:
            raise ParameterDomainError("angle_measure must lie in [0, 1]")
        if self.axes not in (1, 3):
            raise ParameterDomainError("axes must be 1 or 3")
        if self.steps < 64 * self.t_bar:
            raise ParameterDomainError(f"steps must be at least 64 * t_bar = {64 * self.t_bar:g}")

    @property
    def drive_frequency(self) -> float:
        """Cycles per global step."""
        per_axis_steps = 1 if self.simultaneous else self.axes
        return 1.0 / (2 * per_axis_steps * self.t_bar)


@numba.njit(cache=True)
def _oscillate(seed, stream, counter0, t_bar, measure, axes, steps, simultaneous, out):
    moves = np.zeros(axes, dtype=np.int64)
    angle = np.zeros(axes, dtype=np.int64)
    for s in range(steps):
        w0, w1, w2, w3 = draw_words(seed, stream, counter0 + np.uint64(s))
        for a in range(axes):
            if simultaneous or s % axes == a:
                j = moves[a]
                word = w0 if a == 0 else (w1 if a == 1 else w2)
                if word_to_unit(word) < measure:
                    angle[a] += 1 if (math.floor(j / t_bar) % 2) == 0 else -1
                else:
                    angle[a] += 1 if (w3 >> np.uint32(a)) & np.uint32(1) else -1
                moves[a] = j + 1
            out[a, s] = angle[a]


def simulate_oscillation(config: OscillationConfig) -> np.ndarray:
    """Integer angle series, shape (axes, steps), sampled every global step.

    Axis a moves on the steps s with s % axes == a (round robin; every step
    when ``simultaneous``).  Its j-th move follows the drive, +1 while
    floor(j / Tbar) is even and -1 otherwise, with probability angle_measure;
    otherwise it is a fair +-1 coin.  The drive clock keeps running through
    noisy moves, so the per-axis period is 2 * axes * Tbar global steps.
    """
    out = np.zeros((config.axes, int(config.steps)), dtype=np.int64)
    r = config.rng
    _oscillate(
        np.uint64(r.seed), np.uint64(r.stream_id), np.uint64(r.counter), float(config.t_bar),
        float(config.angle_measure), int(config.axes), int(config.steps), bool(config.simultaneous), out,
    )
    return out


def axis_moves(series, axis: int, axes: int) -> np.ndarray:
    """Angle of one axis after each of its own moves (round-robin schedule)."""
    return np.asarray(series)[axis::axes]


@dataclass
class SpectralReport:
    frequencies: np.ndarray
    power: np.ndarray
    dominant_freq: float
    snr: float
    detected: bool
    expected_freq: float | None = None


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def periodogram(series) -> tuple[np.ndarray, np.ndarray]:
    """Two-sided periodogram of the mean-removed series, normalised so the
    powers sum to the series variance."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    spec = np.abs(np.fft.fft(x)) ** 2 / x.size**2
    return np.fft.fftfreq(x.size), spec


def spectral_detect(
    series, detection_snr: float = DEFAULT_SNR, expected_freq: float | None = None, stride: int = 1
) -> SpectralReport:
    """Welch periodogram of the differenced, zero-padded series.

    ``series`` holds one sample every ``stride`` steps; frequencies are
    reported in cycles per step.  The series is differenced (which removes
    random-walk trends) and padded to a power of two.  Segments are 1/8 of
    the padded length (at least 64 samples), Hann-windowed with half
    overlap.  ``snr`` is the largest power within one bin of
    ``expected_freq`` (or of the dominant frequency when none is given) over
    the median power of all nonzero frequencies; an expected frequency above
    the Nyquist limit cannot be seen and gives snr 0.
    """
    x = np.asarray(series, dtype=float)
    if x.size < 4:
        raise ParameterDomainError("series must have at least 4 samples")
    if detection_snr <= 0:
        raise ParameterDomainError("detection_snr must be positive")
    d = np.diff(x)
    n = _next_pow2(d.size)
    d = np.concatenate([d - d.mean(), np.zeros(n - d.size)])
    nperseg = max(min(64, n), n // 8)
    freqs, power = signal.welch(d, fs=1.0, window="hann", nperseg=nperseg, detrend="constant")
    freqs = freqs / stride
    body = slice(1, None)
    dominant = float(freqs[1 + int(np.argmax(power[body]))])
    background = float(np.median(power[body]))
    target = dominant if expected_freq is None else expected_freq
    k = int(round(target * stride * nperseg))
    lo, hi = max(1, k - 1), min(len(power) - 1, k + 1)
    peak = float(power[lo : hi + 1].max()) if lo <= hi else 0.0
    snr = peak / background if background > 0 else (math.inf if peak > 0 else 0.0)
    return SpectralReport(freqs, power, dominant, snr, snr >= detection_snr, expected_freq)


def detect_axis(config: OscillationConfig, detection_snr: float = DEFAULT_SNR, axis: int = 0) -> SpectralReport:
    """Simulate and run detection on one axis at its own move cadence."""
    series = simulate_oscillation(config)[axis]
    stride = 1 if config.simultaneous else config.axes
    return spectral_detect(
        axis_moves(series, axis, stride), detection_snr, config.drive_frequency, stride
    )


@dataclass
class SweepResult:
    t_bars: np.ndarray
    probability: np.ndarray
    stderr: np.ndarray
    threshold: float
    trials: list  # (t_bar, trial, detected, snr, dominant_freq)


def _logistic(logt, centre, slope):
    return 1.0 / (1.0 + np.exp(-slope * (logt - centre)))


def fit_threshold(t_bars, probability) -> float:
    """Tbar at 50% detection from a logistic fit in log Tbar."""
    t = np.asarray(t_bars, dtype=float)
    p = np.asarray(probability, dtype=float)
    if np.all(p >= 1.0) or np.all(p <= 0.0):
        raise BracketFailureError("detection is all-or-nothing on this grid; widen the Tbar grid")
    logt = np.log(t)
    below = np.where(p < 0.5)[0]
    above = np.where(p >= 0.5)[0]
    separated = below.size and above.size and below.max() < above.min()
    if separated and np.all((p == 0.0) | (p == 1.0)):
        # a step function has no slope to fit: take the geometric midpoint
        return float(math.exp(0.5 * (logt[below.max()] + logt[above.min()])))
    guess = 0.5 * (logt[below.max()] + logt[above.min()]) if separated else float(np.median(logt))
    try:
        (centre, _), _ = optimize.curve_fit(_logistic, logt, p, p0=(guess, 4.0), maxfev=10000)
    except RuntimeError as exc:
        raise BracketFailureError(f"logistic fit failed: {exc}") from exc
    return float(math.exp(centre))


def threshold_sweep(
    t_bar_grid,
    angle_measure: float,
    trials_per_point: int,
    detection_snr: float = DEFAULT_SNR,
    rng: RngStream = RngStream(0),
    axes: int = 3,
    steps: int | None = None,
) -> SweepResult:
    """Detection probability for each Tbar and the fitted 50% threshold.

    Trial i at grid point g uses stream (seed, (stream << 32) + g * 2**20 + i),
    so results do not depend on evaluation order.  ``steps`` defaults to the
    larger of 2**14 and 64 * max(Tbar) rounded up to a power of two.
    """
    grid = np.array(sorted(float(t) for t in t_bar_grid))
    if grid.size < 2:
        raise ParameterDomainError("the grid needs at least two points")
    if trials_per_point < 1:
        raise ParameterDomainError("trials_per_point must be >= 1")
    n_steps = steps or max(1 << 14, _next_pow2(int(math.ceil(64 * grid.max()))))
    base = rng.stream_id << 32
    probs, errs, records = [], [], []
    for g, t_bar in enumerate(grid):
        hits = 0
        for i in range(trials_per_point):
            cfg = OscillationConfig(
                t_bar, angle_measure, axes, n_steps, RngStream(rng.seed, base + (g << 20) + i, rng.counter)
            )
            rep = detect_axis(cfg, detection_snr)
            hits += rep.detected
            records.append((t_bar, i, bool(rep.detected), rep.snr, rep.dominant_freq))
        p = hits / trials_per_point
        probs.append(p)
        errs.append(math.sqrt(max(p * (1 - p), 0.25 / trials_per_point) / trials_per_point))
    probs, errs = np.array(probs), np.array(errs)
    return SweepResult(grid, probs, errs, fit_threshold(grid, probs), records)


def monotone_within(probability, stderr, sigmas: float = 2.0) -> bool:
    """True if no later point falls below an earlier one by more than ``sigmas`` combined errors."""
    p, e = np.asarray(probability), np.asarray(stderr)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] - p[j] > sigmas * math.hypot(e[i], e[j]):
                return False
    return True
