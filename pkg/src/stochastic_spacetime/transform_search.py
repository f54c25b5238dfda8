"""Brute-force search over coefficient-restricted coordinate transformations.

A candidate W is a 4x4 matrix with entries from ``COEFFICIENTS``.  Its index
is the base-5 number whose digits are the coefficient positions of the
entries in row-major order, most significant digit first, so index 0 is the
zero matrix and index 5**16 - 1 has every entry equal to -i.

W is a hit when W^T G(a) W is real at every sampled phase a, with G one of
the diagonal complex metrics of :mod:`metric_algebra`.  Because G is
diagonal, W^T G W = sum_k g_k(a) r_k^T r_k over the rows r_k of W, so the
imaginary part splits into a contribution from rows (0, 1) and one from
rows (2, 3).  The scanner tabulates both halves once (625**2 entries each),
assigns every distinct half-vector an integer id, and then a candidate is a
hit exactly when its two half ids agree.  Hits are re-checked with the plain
matrix product before they are counted.

Trivial equivalence (``dedupe_trivial``) is generated by

* sign flips of any row of W (primed axis reversal: W^T G W unchanged),
* exchanging rows 0 and 1 (x' <-> y'; g_xx = g_yy in both search metrics),
* sign flips of any column of W (unprimed axis reversal),
* exchanging columns 0 and 1 (x <-> y).

None of these touch the z/t structure.  The class representative is the
smallest index in the orbit.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from itertools import product
from multiprocessing import get_context
from pathlib import Path
from typing import Sequence

import numba
import numpy as np

from .core import ParameterDomainError
from .metric_algebra import det4, f_metric_catalog, plane_wave_metric, variant_metric

COEFFICIENTS = np.array([0, 1, -1, 1j, -1j], dtype=np.complex128)
SPACE_SIZE = 5**16
ROW_COUNT = 625
HALF_COUNT = ROW_COUNT * ROW_COUNT

CONSTRAINTS = frozenset(
    {"require_invertible", "require_real_metric", "require_real_space_rows", "dedupe_trivial"}
)
SUBSPACES = {"full": 16, "zt-block": 8, "zt-2x2": 4}

# Irrational multiples of pi, chosen so no trigonometric polynomial of low
# integer degree vanishes at all of them by accident.
DEFAULT_PHASES = (math.pi * math.sqrt(2) / 3, math.pi * math.sqrt(3) / 5, math.pi * (math.sqrt(5) - 1) / 2)
REAL_TOL = 1e-9
EXEMPLAR_CAP = 64

# All 625 possible rows, indexed by their 4-digit base-5 code.
ROWS = COEFFICIENTS[np.array(list(product(range(5), repeat=4)))]
_ROW_E_X = 125  # digits (1, 0, 0, 0)
_ROW_E_Y = 25  # digits (0, 1, 0, 0)
_ROW_E_Z = 5  # digits (0, 0, 1, 0)
_ROW_E_T = 1  # digits (0, 0, 0, 1)


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    entries: np.ndarray
    index: int

    def __eq__(self, other):
        return isinstance(other, TransformMatrix) and self.index == other.index

    def __hash__(self):
        return hash(self.index)

    def __repr__(self):
        return f"TransformMatrix(index={self.index})"


def _digits_to_entries(digits) -> np.ndarray:
    return COEFFICIENTS[np.asarray(digits)].reshape(4, 4)


def unrank(index: int) -> TransformMatrix:
    index = int(index)
    if not 0 <= index < SPACE_SIZE:
        raise ParameterDomainError(f"index {index} outside [0, 5**16)")
    digits = [(index // 5**p) % 5 for p in range(15, -1, -1)]
    return TransformMatrix(_digits_to_entries(digits), index)


def _entry_digit(value: complex) -> int:
    for d, c in enumerate(COEFFICIENTS):
        if abs(value - c) < 1e-12:
            return d
    raise ParameterDomainError(f"entry {value!r} is not in the coefficient set")


def rank(w) -> int:
    entries = w.entries if isinstance(w, TransformMatrix) else np.asarray(w)
    index = 0
    for value in np.asarray(entries).ravel():
        index = index * 5 + _entry_digit(value)
    return index


def unrank_many(indices) -> np.ndarray:
    """Entries for an array of indices, shape (n, 4, 4)."""
    idx = np.asarray(indices, dtype=np.int64)
    rows = np.stack([(idx // ROW_COUNT ** (3 - k)) % ROW_COUNT for k in range(4)], axis=-1)
    return ROWS[rows]


def rank_many(entries) -> np.ndarray:
    e = np.asarray(entries).reshape(-1, 16)
    digits = np.zeros(e.shape, dtype=np.int64)
    for d, c in enumerate(COEFFICIENTS):
        digits[np.abs(e - c) < 1e-12] = d
    weights = 5 ** np.arange(15, -1, -1, dtype=np.int64)
    return digits @ weights


def search_metric_diagonal(metric: str, alpha: float) -> np.ndarray:
    return np.diag(variant_metric(metric, alpha).entries)


def produces_real_metric(
    w, phase_samples: Sequence[float] = DEFAULT_PHASES, metric: str = "two_slit_1976"
) -> bool:
    """True iff W^T G(a) W has max |imag| < 1e-9 at every sampled phase."""
    if len(phase_samples) < 3:
        raise ParameterDomainError("at least three phase samples are required")
    entries = w.entries if isinstance(w, TransformMatrix) else np.asarray(w, dtype=np.complex128)
    if np.any(np.all(np.abs(entries) == 0, axis=1)):
        return False
    for a in phase_samples:
        g = variant_metric(metric, a).entries
        if np.abs((entries.T @ g @ entries).imag).max() >= REAL_TOL:
            return False
    return True


# --- subspaces ---------------------------------------------------------------


def subspace_size(subspace: str) -> int:
    try:
        return 5 ** SUBSPACES[subspace]
    except KeyError:
        raise ParameterDomainError(f"unknown subspace {subspace!r}; choose from {sorted(SUBSPACES)}") from None


@numba.njit(cache=True)
def _to_full_index(sub_index, mode):
    # mode 0: full space; 1: zt-block (x, y rows fixed to identity);
    # 2: zt-2x2 (identity except the z, t block).
    if mode == 0:
        return sub_index
    if mode == 1:
        return (125 * 625 + 25) * 390625 + sub_index
    d22 = (sub_index // 125) % 5
    d23 = (sub_index // 25) % 5
    d32 = (sub_index // 5) % 5
    d33 = sub_index % 5
    return (125 * 625 + 25) * 390625 + (d22 * 5 + d23) * 625 + (d32 * 5 + d33)


_MODE = {"full": 0, "zt-block": 1, "zt-2x2": 2}


def to_full_index(sub_index: int, subspace: str) -> int:
    return int(_to_full_index(np.int64(sub_index), _MODE[subspace]))


# --- half tables ---------------------------------------------------------------

_TABLE_CACHE: dict = {}


def half_tables(metric: str, phases: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Integer ids for the imaginary parts contributed by rows (0,1) and (2,3).

    Candidate (r0, r1, r2, r3) is real at all phases iff
    left[r0 * 625 + r1] == right[r2 * 625 + r3].
    """
    key = (metric, tuple(float(p) for p in phases))
    if key in _TABLE_CACHE:
        return _TABLE_CACHE[key]
    iu = np.triu_indices(4)
    outer = (ROWS[:, :, None] * ROWS[:, None, :])[:, iu[0], iu[1]]  # (625, 10)
    diag = np.array([search_metric_diagonal(metric, a) for a in phases])  # (P, 4)
    contrib = [
        (diag[:, k, None, None] * outer[None]).imag.transpose(1, 0, 2).reshape(ROW_COUNT, -1)
        for k in range(4)
    ]
    left = (contrib[0][:, None, :] + contrib[1][None, :, :]).reshape(HALF_COUNT, -1)
    right = -(contrib[2][:, None, :] + contrib[3][None, :, :]).reshape(HALF_COUNT, -1)
    keys = np.round(np.concatenate([left, right]) * 1e7).astype(np.int64)
    _, ids = np.unique(keys, axis=0, return_inverse=True)
    ids = ids.ravel().astype(np.int64)
    tables = (ids[:HALF_COUNT].copy(), ids[HALF_COUNT:].copy())
    _TABLE_CACHE[key] = tables
    return tables


@numba.njit(cache=True)
def _scan(start, count, stride, mode, left, right, out):
    hits = 0
    cap = out.shape[0]
    for j in range(count):
        full = _to_full_index(start + j * stride, mode)
        if left[full // 390625] == right[full % 390625]:
            if hits < cap:
                out[hits] = full
            hits += 1
    return hits


# --- reports ---------------------------------------------------------------------


@dataclass
class SearchSpec:
    index_range: tuple[int, int] = (0, 5**8)
    constraints: frozenset = frozenset({"require_real_metric", "require_invertible", "dedupe_trivial"})
    sample_stride: int = 1
    subspace: str = "zt-block"
    metric: str = "two_slit_1976"
    phases: tuple[float, ...] = DEFAULT_PHASES
    chunk_size: int = 1 << 24

    def __post_init__(self):
        self.constraints = frozenset(self.constraints)
        unknown = self.constraints - CONSTRAINTS
        if unknown:
            raise ParameterDomainError(f"unknown constraints {sorted(unknown)}")
        lo, hi = (int(v) for v in self.index_range)
        size = subspace_size(self.subspace)
        if not 0 <= lo <= hi <= size:
            raise ParameterDomainError(f"index range {self.index_range} outside [0, {size})")
        if int(self.sample_stride) < 1:
            raise ParameterDomainError("sample_stride must be >= 1")
        if len(self.phases) < 3:
            raise ParameterDomainError("at least three phase samples are required")
        self.index_range = (lo, hi)
        self.sample_stride = int(self.sample_stride)
        variant_metric(self.metric, 0.0)

    @property
    def candidate_count(self) -> int:
        lo, hi = self.index_range
        return max(0, -(-(hi - lo) // self.sample_stride))


@dataclass
class SearchReport:
    candidates_examined: int = 0
    real_metric_hits: int = 0
    invertible_hits: int = 0
    real_space_row_hits: int = 0
    distinct_classes: int = 0
    hit_exemplars: list = field(default_factory=list)
    wall_time: float = 0.0
    class_representatives: list = field(default_factory=list)

    @property
    def hit_rate(self) -> float:
        return self.real_metric_hits / self.candidates_examined if self.candidates_examined else 0.0

    @property
    def candidates_per_second(self) -> float:
        return self.candidates_examined / self.wall_time if self.wall_time > 0 else float("inf")

    def merge(self, other: "SearchReport") -> "SearchReport":
        classes = sorted(set(self.class_representatives) | set(other.class_representatives))
        exemplars = sorted({*self.hit_exemplars, *other.hit_exemplars}, key=lambda w: w.index)
        return SearchReport(
            candidates_examined=self.candidates_examined + other.candidates_examined,
            real_metric_hits=self.real_metric_hits + other.real_metric_hits,
            invertible_hits=self.invertible_hits + other.invertible_hits,
            real_space_row_hits=self.real_space_row_hits + other.real_space_row_hits,
            distinct_classes=len(classes),
            hit_exemplars=exemplars[:EXEMPLAR_CAP],
            wall_time=self.wall_time + other.wall_time,
            class_representatives=classes,
        )

    def same_result(self, other: "SearchReport") -> bool:
        """Equality of everything except wall time."""
        a, b = self.to_dict(), other.to_dict()
        a.pop("wall_time")
        b.pop("wall_time")
        return a == b

    def to_dict(self) -> dict:
        return {
            "candidates_examined": self.candidates_examined,
            "real_metric_hits": self.real_metric_hits,
            "invertible_hits": self.invertible_hits,
            "real_space_row_hits": self.real_space_row_hits,
            "distinct_classes": self.distinct_classes,
            "hit_exemplars": [w.index for w in self.hit_exemplars],
            "class_representatives": list(self.class_representatives),
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SearchReport":
        return cls(
            candidates_examined=doc["candidates_examined"],
            real_metric_hits=doc["real_metric_hits"],
            invertible_hits=doc["invertible_hits"],
            real_space_row_hits=doc["real_space_row_hits"],
            distinct_classes=doc["distinct_classes"],
            hit_exemplars=[unrank(i) for i in doc["hit_exemplars"]],
            wall_time=doc["wall_time"],
            class_representatives=list(doc["class_representatives"]),
        )


def has_real_space_rows(entries: np.ndarray) -> np.ndarray:
    """x', y', z' built from real x, y, z and i t; t' from i x, i y, i z and t."""
    e = np.asarray(entries).reshape(-1, 4, 4)
    space_ok = (np.abs(e[:, :3, :3].imag).max(axis=(1, 2)) == 0) & (
        np.abs(e[:, :3, 3].real).max(axis=1) == 0
    )
    time_ok = (np.abs(e[:, 3, :3].real).max(axis=1) == 0) & (np.abs(e[:, 3, 3].imag) == 0)
    return space_ok & time_ok


def _equivalence_ops():
    ops = []
    perms = [np.array([0, 1, 2, 3]), np.array([1, 0, 2, 3])]
    for rp in perms:
        for cp in perms:
            for rs in product((1, -1), repeat=4):
                for cs in product((1, -1), repeat=4):
                    ops.append((rp, np.array(rs), cp, np.array(cs)))
    return ops


_EQUIV_OPS = None


def canonical_indices(entries) -> np.ndarray:
    """Smallest index in each matrix's trivial-equivalence orbit."""
    global _EQUIV_OPS
    if _EQUIV_OPS is None:
        _EQUIV_OPS = _equivalence_ops()
    e = np.asarray(entries).reshape(-1, 4, 4)
    best = np.full(len(e), np.iinfo(np.int64).max, dtype=np.int64)
    for rp, rs, cp, cs in _EQUIV_OPS:
        variant = (e[:, rp, :] * rs[None, :, None])[:, :, cp] * cs[None, None, :]
        best = np.minimum(best, rank_many(variant))
    return best


def _classify_hits(full_indices: np.ndarray, spec: SearchSpec) -> SearchReport:
    report = SearchReport()
    if len(full_indices) == 0:
        return report
    entries = unrank_many(full_indices)
    real = np.ones(len(entries), dtype=bool)
    for a in spec.phases:
        g = search_metric_diagonal(spec.metric, a)
        prod_ = np.einsum("nki,k,nkj->nij", entries, g, entries)
        real &= np.abs(prod_.imag).max(axis=(1, 2)) < REAL_TOL
    entries, full_indices = entries[real], full_indices[real]
    invertible = np.abs(det4(entries)) > 1e-9
    space_rows = has_real_space_rows(entries)
    report.real_metric_hits = int(real.sum())
    report.invertible_hits = int(invertible.sum())
    report.real_space_row_hits = int(space_rows.sum())

    keep = np.ones(len(entries), dtype=bool)
    if "require_invertible" in spec.constraints:
        keep &= invertible
    if "require_real_space_rows" in spec.constraints:
        keep &= space_rows
    if "dedupe_trivial" in spec.constraints:
        reps = np.unique(canonical_indices(entries[keep]))
        report.class_representatives = [int(i) for i in reps]
        report.distinct_classes = len(reps)
    else:
        report.class_representatives = sorted(int(i) for i in full_indices[keep])
        report.distinct_classes = len(report.class_representatives)
    report.hit_exemplars = [unrank(i) for i in sorted(full_indices[keep])[:EXEMPLAR_CAP]]
    return report


def _run_chunk(args) -> SearchReport:
    spec, start, count = args
    t0 = time.perf_counter()
    left, right = half_tables(spec.metric, spec.phases)
    out = np.empty(min(count, 1 << 22), dtype=np.int64)
    hits = _scan(start, count, spec.sample_stride, _MODE[spec.subspace], left, right, out)
    if hits > len(out):
        out = np.empty(hits, dtype=np.int64)
        _scan(start, count, spec.sample_stride, _MODE[spec.subspace], left, right, out)
    report = _classify_hits(out[:hits], spec)
    if report.real_metric_hits != hits:
        raise RuntimeError("half-table id collision: re-check rejected a table hit")
    report.candidates_examined = count
    report.wall_time = time.perf_counter() - t0
    return report


def _chunks(spec: SearchSpec, resume_from: int | None = None):
    lo, hi = spec.index_range
    stride = spec.sample_stride
    start = lo if resume_from is None else resume_from
    per_chunk = max(1, spec.chunk_size)
    while start < hi:
        count = min(per_chunk, -(-(hi - start) // stride))
        yield start, count
        start += count * stride


def run_search(spec: SearchSpec, workers: int = 1, checkpoint: str | Path | None = None) -> SearchReport:
    """Scan ``spec.index_range`` (every ``sample_stride``-th index) of the subspace.

    The report does not depend on ``workers``.  With ``checkpoint`` the partial
    report is written after every chunk and an existing file is resumed.
    """
    if workers < 1:
        raise ParameterDomainError("workers must be >= 1")
    t0 = time.perf_counter()
    total = SearchReport()
    resume_from = None
    if checkpoint is not None and Path(checkpoint).exists():
        doc = json.loads(Path(checkpoint).read_text())
        if tuple(doc["range"]) != tuple(spec.index_range):
            raise ParameterDomainError("checkpoint belongs to a different index range")
        total = SearchReport.from_dict(doc["partial_report"])
        resume_from = doc["last_completed_index"] + spec.sample_stride
    half_tables(spec.metric, spec.phases)  # build before forking
    tasks = [(spec, s, c) for s, c in _chunks(spec, resume_from)]
    if workers == 1:
        results = map(_run_chunk, tasks)
        pool = None
    else:
        pool = get_context("fork").Pool(workers)
        results = pool.imap(_run_chunk, tasks)
    try:
        for (start, count), part in zip(((s, c) for _, s, c in tasks), results):
            wall = total.wall_time
            total = total.merge(part)
            total.wall_time = wall
            if checkpoint is not None:
                last = start + (count - 1) * spec.sample_stride
                Path(checkpoint).write_text(
                    json.dumps(
                        {
                            "range": list(spec.index_range),
                            "last_completed_index": last,
                            "partial_report": total.to_dict(),
                        }
                    )
                )
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    total.wall_time += time.perf_counter() - t0
    return total


def exact_hit_count(metric: str = "plane_wave_2016", phases: Sequence[float] = DEFAULT_PHASES) -> int:
    """Number of real-metric hits in the whole 5**16 space (meet in the middle)."""
    left, right = half_tables(metric, phases)
    n = int(max(left.max(), right.max())) + 1
    return int(np.dot(np.bincount(left, minlength=n).astype(np.int64), np.bincount(right, minlength=n)))


def brute_force_hits(subspace: str, metric: str, phases: Sequence[float] = DEFAULT_PHASES) -> list[int]:
    """Reference enumeration: one explicit W^T G W per candidate (small subspaces only)."""
    size = subspace_size(subspace)
    if size > 5**8:
        raise ParameterDomainError("brute force is limited to subspaces of at most 5**8 candidates")
    hits = []
    metrics = [variant_metric(metric, a).entries for a in phases]
    for i in range(size):
        full = to_full_index(i, subspace)
        w = unrank(full).entries
        if all(np.abs((w.T @ g @ w).imag).max() < REAL_TOL for g in metrics):
            hits.append(full)
    return hits


# --- F table verification ----------------------------------------------------------


@dataclass
class FVerification:
    name: str
    matched: bool
    convention: str
    scale: float
    max_error: float
    transform_determinant: complex
    inverse_available: bool


def _fit_scale(candidate: np.ndarray, target: np.ndarray) -> tuple[float, float]:
    c, t = candidate.ravel(), target.ravel()
    denom = np.vdot(c, c).real
    if denom == 0.0:
        return 0.0, float(np.abs(t).max())
    s = np.vdot(c, t).real / denom
    return float(s), float(np.abs(s * c - t).max())


def verify_f_transforms(n_phases: int = 20, tol: float = 1e-9, seed: int = 0) -> list[FVerification]:
    """Check each coordinate table against its F matrix.

    Both directions are tried on the plane-wave metric: G' = A^T G A and
    G' = A^-T G A^-1 (only when A is invertible).  A single overall scale is
    fitted per convention across all phases.
    """
    from .rng import RngStream

    phases, _ = RngStream(seed, 0xF7AB).uniforms(n_phases)
    phases = 2 * math.pi * phases
    records = []
    for f in f_metric_catalog():
        a = f.transform
        det_a = complex(det4(a))
        invertible = abs(det_a) > 1e-12
        targets = np.array([f(p).entries for p in phases])
        candidates = {"A^T G A": np.array([a.T @ plane_wave_metric(p).entries @ a for p in phases])}
        if invertible:
            ai = np.linalg.inv(a)
            candidates["A^-T G A^-1"] = np.array(
                [ai.T @ plane_wave_metric(p).entries @ ai for p in phases]
            )
        best = FVerification(f.name, False, "UNMATCHED", float("nan"), float("inf"), det_a, invertible)
        for name, cand in candidates.items():
            scale, err = _fit_scale(cand, targets)
            if err < tol and (not best.matched or err < best.max_error):
                best = FVerification(f.name, True, name, scale, err, det_a, invertible)
            elif not best.matched and err < best.max_error:
                best = FVerification(f.name, False, "UNMATCHED", scale, err, det_a, invertible)
        records.append(best)
    return records
