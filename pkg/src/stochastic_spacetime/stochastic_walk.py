"""Granular random walks of venues on the integer Planck lattice.

One step of one walker consumes two Philox draws (eight 32-bit words):

    word 0      indeterminacy gate: migrate iff unit < indeterminacy
    words 1-3   spatial coins x, y, z: +1 iff unit < measure, else -1
    words 4-6   time coins (only word 4 is used without ds2 conservation)
    word 7      sequence reversal: spatial measures complemented this step

Walker ``w`` of a run seeded by ``RngStream(seed, stream, counter)`` uses
stream id ``(stream << 32) + w`` and draw counters ``counter + 2 * step`` and
``counter + 2 * step + 1``, so any walker can be replayed alone with
:func:`step`.  The whole step (space and time) is gated atomically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .core import ParameterDomainError, planck_units
from .rng import RngStream, draw_words, philox_block, word_to_unit

_INV32 = 1.0 / 4294967296.0


@dataclass(frozen=True)
class WalkConfig:
    measures: tuple[float, float, float, float] = (0.5, 0.5, 0.5, 0.5)
    indeterminacy: float = 1.0
    step_length: float = field(default_factory=lambda: planck_units().l_p)
    step_time: float = field(default_factory=lambda: planck_units().t_p)
    ds2_conservation: bool = False
    steps: int = 100
    sequence_reversal_rate: float = 0.0
    # standard deviation of metric-gradient kicks for stochastic geodesics
    metric_fluctuation: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(float(m) for m in self.measures))
        if len(self.measures) != 4:
            raise ParameterDomainError("measures needs one value per axis (x, y, z, t)")
        for name, value in [
            *(("measure", m) for m in self.measures),
            ("indeterminacy", self.indeterminacy),
            ("sequence_reversal_rate", self.sequence_reversal_rate),
        ]:
            if not 0.0 <= value <= 1.0:
                raise ParameterDomainError(f"{name} must lie in [0, 1], got {value}")
        if int(self.steps) < 1:
            raise ParameterDomainError("steps must be >= 1")
        if self.metric_fluctuation < 0:
            raise ParameterDomainError("metric_fluctuation must be nonnegative")


@dataclass(frozen=True)
class VenueState:
    spatial: tuple[int, int, int] = (0, 0, 0)
    t_coord: int = 0
    tau_phase: int = 0
    helix_rung: int = 0

    def __post_init__(self):
        object.__setattr__(self, "spatial", tuple(int(v) for v in self.spatial))
        object.__setattr__(self, "tau_phase", int(self.tau_phase) % 6)


def walker_stream(rng: RngStream, walker: int) -> RngStream:
    if rng.stream_id >= 1 << 32:
        raise ParameterDomainError("base stream id must fit in 32 bits")
    return RngStream(rng.seed, (rng.stream_id << 32) + int(walker), rng.counter)


def step(state: VenueState, config: WalkConfig, rng: RngStream) -> tuple[VenueState, RngStream]:
    """Advance one venue by one step; returns the new state and advanced stream."""
    w = philox_block(rng.seed, rng.stream_id, rng.counter) + philox_block(
        rng.seed, rng.stream_id, rng.counter + 1
    )
    u = [x * _INV32 for x in w]
    nxt = rng.advance(2)
    if not u[0] < config.indeterminacy:
        return state, nxt
    space = list(config.measures[:3])
    if u[7] < config.sequence_reversal_rate:
        space = [1.0 - m for m in space]
    spatial = tuple(p + (1 if u[1 + a] < space[a] else -1) for a, p in enumerate(state.spatial))
    n_time = 3 if config.ds2_conservation else 1
    dt = sum(1 if u[4 + j] < config.measures[3] else -1 for j in range(n_time))
    return (
        VenueState(spatial, state.t_coord + dt, (state.tau_phase + n_time) % 6, state.helix_rung + n_time),
        nxt,
    )


@numba.njit(cache=True)
def _walk_kernel(
    seed, stream_base, counter0, steps, measures, indeterminacy, ds2, reversal_rate,
    coarse, state, moves, superluminal, record,
):
    n = state.shape[0]
    n_time = 3 if ds2 else 1
    n_record = record.shape[0]
    for w in range(n):
        sid = stream_base + np.uint64(w)
        x0 = state[w, 0]
        y0 = state[w, 1]
        z0 = state[w, 2]
        t0 = state[w, 3]
        for s in range(steps):
            c = counter0 + np.uint64(2 * s)
            a0, a1, a2, a3 = draw_words(seed, sid, c)
            b0, b1, b2, b3 = draw_words(seed, sid, c + np.uint64(1))
            if word_to_unit(a0) < indeterminacy:
                m0 = measures[0]
                m1 = measures[1]
                m2 = measures[2]
                if word_to_unit(b3) < reversal_rate:
                    m0 = 1.0 - m0
                    m1 = 1.0 - m1
                    m2 = 1.0 - m2
                state[w, 0] += 1 if word_to_unit(a1) < m0 else -1
                state[w, 1] += 1 if word_to_unit(a2) < m1 else -1
                state[w, 2] += 1 if word_to_unit(a3) < m2 else -1
                dt = 1 if word_to_unit(b0) < measures[3] else -1
                if ds2:
                    dt += 1 if word_to_unit(b1) < measures[3] else -1
                    dt += 1 if word_to_unit(b2) < measures[3] else -1
                state[w, 3] += dt
                state[w, 4] = (state[w, 4] + n_time) % 6
                state[w, 5] += n_time
                moves[w, 0] += 3
                moves[w, 1] += n_time
                # per-step segment: spatial length sqrt(3) against |dt|
                if 3 > dt * dt:
                    superluminal[0] += 1
            if coarse > 0 and (s + 1) % coarse == 0:
                dx = state[w, 0] - x0
                dy = state[w, 1] - y0
                dz = state[w, 2] - z0
                dtc = state[w, 3] - t0
                if dx * dx + dy * dy + dz * dz > dtc * dtc:
                    superluminal[1] += 1
                superluminal[2] += 1
                x0 = state[w, 0]
                y0 = state[w, 1]
                z0 = state[w, 2]
                t0 = state[w, 3]
            if w < n_record:
                for j in range(5):
                    record[w, s + 1, j] = state[w, j]


@dataclass
class WalkSummary:
    terminal_positions: np.ndarray  # (walkers, 4) integers: x, y, z, t_coord
    displacement_variance: np.ndarray  # per axis x, y, z, t
    superluminal_fraction: float  # per single step
    superluminal_fraction_coarse: float  # per coarse segment
    merge_events: int = 0
    tau_phase: np.ndarray = None
    helix_rung: np.ndarray = None
    space_migrations: np.ndarray = None
    time_migrations: np.ndarray = None
    paths: np.ndarray = None  # (recorded walkers, steps + 1, 5)

    @property
    def mean_displacement(self) -> np.ndarray:
        return self.terminal_positions.mean(axis=0)

    def to_dict(self) -> dict:
        return {
            "walkers": int(len(self.terminal_positions)),
            "mean_displacement": [float(v) for v in self.mean_displacement],
            "displacement_variance": [float(v) for v in self.displacement_variance],
            "superluminal_fraction": self.superluminal_fraction,
            "superluminal_fraction_coarse": self.superluminal_fraction_coarse,
            "merge_events": int(self.merge_events),
        }


def _initial_state(walkers: int, start: VenueState | None) -> np.ndarray:
    start = start or VenueState()
    row = [*start.spatial, start.t_coord, start.tau_phase, start.helix_rung]
    return np.tile(np.array(row, dtype=np.int64), (walkers, 1))


def run_walk(
    config: WalkConfig,
    walkers: int,
    rng: RngStream,
    start: VenueState | None = None,
    coarse_interval: int = 10,
    record_walkers: int = 0,
) -> WalkSummary:
    """Run independent walkers for ``config.steps`` steps."""
    if walkers < 1:
        raise ParameterDomainError("walkers must be >= 1")
    steps = int(config.steps)
    state = _initial_state(walkers, start)
    moves = np.zeros((walkers, 2), dtype=np.int64)
    sl = np.zeros(3, dtype=np.int64)
    n_record = min(int(record_walkers), walkers)
    record = np.zeros((n_record, steps + 1, 5), dtype=np.int64)
    record[:, 0, :] = state[:n_record, :5]
    walker_stream(rng, 0)
    _walk_kernel(
        np.uint64(rng.seed), np.uint64(rng.stream_id << 32), np.uint64(rng.counter), steps,
        np.array(config.measures), float(config.indeterminacy), bool(config.ds2_conservation),
        float(config.sequence_reversal_rate), int(coarse_interval), state, moves, sl, record,
    )
    origin = _initial_state(1, start)[0, :4]
    disp = state[:, :4] - origin
    return WalkSummary(
        terminal_positions=state[:, :4].copy(),
        displacement_variance=disp.var(axis=0),
        superluminal_fraction=float(sl[0]) / (walkers * steps),
        superluminal_fraction_coarse=float(sl[1]) / sl[2] if sl[2] else 0.0,
        tau_phase=state[:, 4].copy(),
        helix_rung=state[:, 5].copy(),
        space_migrations=moves[:, 0].copy(),
        time_migrations=moves[:, 1].copy(),
        paths=record if n_record else None,
    )


PATH_CSV_HEADER = ("walker_id", "step", "x", "y", "z", "t", "tau_phase")


def path_rows(summary: WalkSummary):
    if summary.paths is None:
        return
    for w, path in enumerate(summary.paths):
        for s, (x, y, z, t, tau) in enumerate(path):
            yield (w, s, int(x), int(y), int(z), int(t), int(tau))


def helix_time(state: VenueState, units=None) -> tuple[float, float, complex]:
    """(t_c in seconds, sequence angle in radians, t_c * exp(i angle)).

    The six sequence phases sit on a hexagon: phase n is at angle n * pi / 3
    (one arc of 2 pi_p / 6 Planck radians per phase, rescaled by pi / pi_p).
    """
    units = units or planck_units()
    t_c = state.t_coord * units.t_p
    angle = (state.tau_phase % 6) * (2 * units.pi_p / 6) * (math.pi / units.pi_p)
    if state.tau_phase % 6 == 0:
        rep = complex(t_c, 0.0)
    else:
        rep = t_c * complex(math.cos(angle), math.sin(angle))
    return t_c, angle, rep


# --- merges -------------------------------------------------------------------


@numba.njit(cache=True)
def _merge_kernel(seed, stream_base, counter0, steps, measures, indeterminacy, ds2, extent, state, empty):
    n = state.shape[0]
    total = 0
    keys = np.empty(n, dtype=np.int64)
    for s in range(steps):
        c = counter0 + np.uint64(2 * s)
        for w in range(n):
            sid = stream_base + np.uint64(w)
            a0, a1, a2, a3 = draw_words(seed, sid, c)
            b0, b1, b2, _ = draw_words(seed, sid, c + np.uint64(1))
            if word_to_unit(a0) < indeterminacy:
                state[w, 0] = (state[w, 0] + (1 if word_to_unit(a1) < measures[0] else -1)) % extent[0]
                state[w, 1] = (state[w, 1] + (1 if word_to_unit(a2) < measures[1] else -1)) % extent[1]
                state[w, 2] = (state[w, 2] + (1 if word_to_unit(a3) < measures[2] else -1)) % extent[2]
                dt = 1 if word_to_unit(b0) < measures[3] else -1
                if ds2:
                    dt += 1 if word_to_unit(b1) < measures[3] else -1
                    dt += 1 if word_to_unit(b2) < measures[3] else -1
                state[w, 3] += dt
        m = 0
        for w in range(n):
            if empty[w]:
                keys[m] = (state[w, 2] * extent[1] + state[w, 1]) * extent[0] + state[w, 0]
                m += 1
        if m > 1:
            k = np.sort(keys[:m])
            distinct = 1
            for i in range(1, m):
                if k[i] != k[i - 1]:
                    distinct += 1
            total += m - distinct
    return total


def merge_statistics(
    config: WalkConfig,
    walkers: int,
    lattice_extent: tuple[int, int, int],
    rng: RngStream,
    starts: np.ndarray | None = None,
    empty: np.ndarray | None = None,
) -> int:
    """Total coincidences of empty venues over ``config.steps`` steps.

    Walkers live on a periodic box of ``lattice_extent`` sites.  After each
    step, every group of k empty walkers sharing a site contributes k - 1
    merge events; all walkers share the global step count, so coordinate
    time plays no part in the match.  Walkers keep moving independently
    afterwards; merging is counted, not enforced.  Default starts are uniform
    over the box, drawn from the stream ``rng.spawn(2**32 - 1)``.
    """
    extent = np.array(lattice_extent, dtype=np.int64)
    if extent.shape != (3,) or np.any(extent < 1):
        raise ParameterDomainError("lattice_extent must be three positive integers")
    if walkers < 1:
        raise ParameterDomainError("walkers must be >= 1")
    state = np.zeros((walkers, 4), dtype=np.int64)
    if starts is None:
        u, _ = RngStream(rng.seed, (1 << 32) - 1, 0).uniforms(3 * walkers)
        state[:, :3] = np.floor(u.reshape(walkers, 3) * extent).astype(np.int64)
    else:
        state[:, :3] = np.asarray(starts, dtype=np.int64).reshape(walkers, 3) % extent
    empty = np.ones(walkers, dtype=np.bool_) if empty is None else np.asarray(empty, dtype=np.bool_)
    walker_stream(rng, 0)
    return int(
        _merge_kernel(
            np.uint64(rng.seed), np.uint64(rng.stream_id << 32), np.uint64(rng.counter),
            int(config.steps), np.array(config.measures), float(config.indeterminacy),
            bool(config.ds2_conservation), extent, state, empty,
        )
    )


def birthday_merges(walkers: int, sites: int) -> tuple[float, float]:
    """Mean and standard deviation of walkers - occupied sites for uniform placement."""
    n, s = walkers, sites
    q1 = (1 - 1 / s) ** n
    q2 = (1 - 2 / s) ** n
    mean_empty = s * q1
    var_empty = s * q1 + s * (s - 1) * q2 - (s * q1) ** 2
    return n - (s - mean_empty), math.sqrt(max(var_empty, 0.0))


# --- Wiener normalisation ---------------------------------------------------------


@numba.njit(cache=True)
def _wiener_kernel(seed, stream_base, counter0, n_steps, literal, out):
    for w in range(out.shape[0]):
        sid = stream_base + np.uint64(w)
        acc = 0.0
        for j in range((n_steps + 3) // 4):
            words = draw_words(seed, sid, counter0 + np.uint64(j))
            for q in range(4):
                i = 4 * j + q
                if i >= n_steps:
                    break
                x = 1.0 if words[q] < np.uint32(2147483648) else -1.0
                if literal:
                    acc += x / math.sqrt(i + 1.0)
                else:
                    acc += x
        out[w] = acc if literal else acc / math.sqrt(n_steps)


def wiener_terminal(n_steps: int, walkers: int, rng: RngStream, normalization: str = "sqrt_n") -> np.ndarray:
    """Terminal values of sums of fair +-1 steps.

    ``sqrt_n`` scales every step by 1/sqrt(N) (unit variance at the end);
    ``sqrt_i`` uses the literal per-step factor 1/sqrt(i), whose variance is
    the harmonic number H_N.
    """
    if normalization not in ("sqrt_n", "sqrt_i"):
        raise ParameterDomainError("normalization must be 'sqrt_n' or 'sqrt_i'")
    out = np.empty(int(walkers))
    walker_stream(rng, 0)
    _wiener_kernel(
        np.uint64(rng.seed), np.uint64(rng.stream_id << 32), np.uint64(rng.counter),
        int(n_steps), normalization == "sqrt_i", out,
    )
    return out
