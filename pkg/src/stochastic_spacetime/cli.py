"""Command-line runner: one subcommand per experiment, CSV data plus a run manifest.

Every run writes ``<subcommand>.csv`` and ``manifest.json`` into ``--out``.
``--config`` takes either a flat ``key = value`` file or a manifest written by
an earlier run; explicit flags override it.  Exit status is 0 on success, 1
for bad parameters and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import NumericalFailure, ParameterDomainError, planck_units
from .manifest import RunManifest
from .rng import RngStream

EXIT_OK, EXIT_PARAMETER, EXIT_NUMERICAL = 0, 1, 2
# flags that describe how a run executes rather than what it computes
_RUNTIME_KEYS = {"out", "config", "workers", "command", "handler"}


class _ParameterError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ParameterError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> tuple[float, float, int]:
    try:
        start, stop, count = str(text).split(":")
        return float(start), float(stop), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from None


def _flag(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


# --- subcommands -----------------------------------------------------------------
# Each handler returns (header, rows, summary).


def _interference(args):
    from .metric_algebra import interference_pattern

    start, stop, count = args.alpha_grid
    grid = np.linspace(start, stop, count)
    rows = [(a, args.beta, d, args.variant) for a, d in interference_pattern(grid, args.beta, args.variant)]
    dens = [r[2] for r in rows]
    return ("alpha", "beta", "density", "variant"), rows, {"max_density": max(dens), "min_density": min(dens)}


def _search(args):
    from .transform_search import SearchSpec, run_search, subspace_size

    size = subspace_size(args.subspace)
    stop = size if args.stop is None else args.stop
    constraints = frozenset(c for c in args.constraints.split(",") if c)
    spec = SearchSpec((args.start, stop), constraints, args.stride, args.subspace, args.metric)
    if spec.candidate_count > 5**12 and not args.long_run:
        raise ParameterDomainError(
            f"{spec.candidate_count} candidates; pass --long-run to confirm a scan this large"
        )
    report = run_search(spec, workers=args.workers, checkpoint=args.checkpoint)
    rows = []
    for w in report.hit_exemplars:
        entries = " ".join(f"{v.real + 0.0:g}:{v.imag + 0.0:g}" for v in w.entries.ravel())
        rows.append((w.index, entries))
    summary = report.to_dict()
    summary.pop("wall_time")
    summary.pop("class_representatives")
    summary["hit_rate"] = report.hit_rate
    return ("index", "matrix_entries"), rows, summary


def _verify_f(args):
    from .transform_search import verify_f_transforms

    recs = verify_f_transforms(n_phases=args.phases)
    rows = [
        (r.name, r.matched, r.convention, r.scale, r.max_error, r.transform_determinant.real, r.transform_determinant.imag)
        for r in recs
    ]
    conventions = sorted({r.convention for r in recs})
    summary = {"all_matched": all(r.matched for r in recs), "conventions": conventions}
    return ("name", "matched", "convention", "scale", "max_error", "det_re", "det_im"), rows, summary


def _ricci(args):
    from .geometry import (
        calibrate_convention,
        first_order_coefficient,
        perturbed_field,
        plane_wave_field,
        plane_wave_ricci_reference,
        ricci,
    )

    stream = RngStream(args.seed)
    draws, _ = stream.uniforms(4 * args.samples)
    rows = []
    comps = {"xx": (0, 0), "yy": (1, 1), "zz": (2, 2), "tt": (3, 3), "zt": (2, 3)}
    for i in range(args.samples):
        u = draws[4 * i : 4 * i + 4]
        k, omega = 0.5 + 1.5 * u[0], 0.5 + 1.5 * u[1]
        z, t = 6 * u[2] - 3, 6 * u[3] - 3
        r = ricci(plane_wave_field(k, omega), z, t)
        ref = plane_wave_ricci_reference(k, omega, z, t)
        for name, (m, n) in comps.items():
            c, e = complex(r[m, n]), complex(ref[name])
            rows.append((name, z, t, k, omega, c.real, c.imag, e.real, e.imag, abs(c - e) / abs(e)))
    if args.b:
        k, omega, z, t = args.k, args.omega, args.z, args.t
        point = np.array([0.0, 0.0, z, t])
        c = first_order_coefficient(lambda b: perturbed_field(k, omega, b), point, (2, 3), args.b)
        e = 2 * k * omega * np.exp(-1j * (k * z - omega * t))
        rows.append(("zt_first_order", z, t, k, omega, c.real, c.imag, e.real, e.imag, abs(c - e) / abs(e)))
    summary = {
        "convention": calibrate_convention(),
        "max_rel_err_plane_wave": max(r[-1] for r in rows if r[0] != "zt_first_order"),
    }
    header = ("component", "z", "t", "k", "omega", "computed_re", "computed_im", "reference_re", "reference_im", "rel_err")
    return header, rows, summary


def _geodesic(args):
    from .geometry import (
        CSV_HEADER,
        GeodesicState,
        geodesic_integrate,
        minkowski_field,
        norm_along,
        perturbed_field,
        plane_wave_field,
    )
    from .gravity_model import assemble_line_element
    from .stochastic_walk import WalkConfig

    if args.field == "schwarzschild":
        field = assemble_line_element(args.r_s).metric_field()
        m = args.r_s / 2
        omega = math.sqrt(m / args.r0**3)
        ut = 1 / math.sqrt(1 - 3 * m / args.r0)
        start = GeodesicState([math.pi / 2, 0.0, args.r0, 0.0], [0.0, omega * ut, 0.0, ut])
    else:
        field = {
            "minkowski": minkowski_field,
            "plane_wave": lambda: plane_wave_field(args.k, args.omega),
            "perturbed": lambda: perturbed_field(args.k, args.omega, args.b),
        }[args.field]()
        v = _float_list(args.velocity)
        if len(v) != 4:
            raise ParameterDomainError("--velocity needs four components")
        start = GeodesicState(np.zeros(4), v)
    stochastic = None
    if args.stochastic:
        stochastic = WalkConfig(indeterminacy=args.indeterminacy, metric_fluctuation=args.fluctuation)
    traj = geodesic_integrate(field, start, args.steps, args.ds, stochastic, RngStream(args.seed))
    norms = norm_along(field, traj)
    summary = {
        "steps_completed": len(traj.s) - 1,
        "diagnostic": traj.diagnostic,
        "norm_drift": float(np.abs(norms - norms[0]).max()),
    }
    return CSV_HEADER, list(traj.csv_rows()), summary


_SEED_DISTRIBUTIONS = {
    "uniform": lambda: _ps().uniform_grid(-1, 1),
    "two_point": lambda: _ps().GridDistribution.from_weights(-1, 1.0, [1, 0, 1]),
    "bimodal": lambda: _ps().GridDistribution.from_weights(-3, 1.0, [2, 1, 0, 1, 0, 1, 2]),
    "gaussian": lambda: _ps().gaussian_grid(1.5, 0.5),
}


def _ps():
    from . import particle_stats

    return particle_stats


def _spread(args):
    d1 = _SEED_DISTRIBUTIONS[args.distribution]()
    res = _ps().iterated_spread(d1, args.n)
    summary = {"slope": res.slope, "final_skew": res.skew, "final_excess_kurtosis": res.excess_kurtosis, "var_d1": d1.variance}
    return ("n", "variance", "skew", "kurtosis"), list(res.csv_rows()), summary


def _walk(args):
    from .stochastic_walk import PATH_CSV_HEADER, WalkConfig, path_rows, run_walk

    measures = _float_list(args.measures)
    if len(measures) == 1:
        measures = measures * 4
    cfg = WalkConfig(
        measures=tuple(measures),
        indeterminacy=args.indeterminacy,
        ds2_conservation=args.ds2,
        steps=args.steps,
        sequence_reversal_rate=args.reversal_rate,
    )
    summary = run_walk(cfg, args.walkers, RngStream(args.seed), record_walkers=args.record)
    return PATH_CSV_HEADER, list(path_rows(summary)), summary.to_dict()


def _uncertainty(args):
    ps = _ps()
    spec = ps.MetricFluctuationSpec(args.sigma, args.distribution)
    recs = ps.uncertainty_product(
        spec, args.p_cov, _float_list(args.volumes), RngStream(args.seed), args.cells_per_volume, args.samples
    )
    rows = [(r.volume, r.delta_q, r.delta_g, r.product) for r in recs]
    products = [r.product for r in recs]
    spread = (max(products) - min(products)) / abs(np.mean(products)) if any(products) else 0.0
    return ("volume", "delta_q", "delta_g", "product"), rows, {"relative_spread": spread}


def _compton(args):
    from .compton_osc import OscillationConfig, detect_axis, t_bar_of_mass

    cfg = OscillationConfig(args.t_bar, args.measure, args.axes, args.steps, RngStream(args.seed))
    rep = detect_axis(cfg, args.snr)
    units = planck_units()
    summary = {
        "drive_frequency": cfg.drive_frequency,
        "detected": bool(rep.detected),
        "t_bar_planck_mass": t_bar_of_mass(units.m_p, args.axes),
        "t_bar_planck_mass_planck_pi": t_bar_of_mass(units.m_p, args.axes, planck_pi=True),
    }
    rows = [(args.t_bar, 0, bool(rep.detected), rep.snr, rep.dominant_freq)]
    return ("t_bar", "trial", "detected", "snr", "dominant_freq"), rows, summary


def _sweep(args):
    from .compton_osc import monotone_within, threshold_sweep

    start, stop, count = args.t_bar_grid
    grid = np.logspace(math.log10(start), math.log10(stop), count)
    res = threshold_sweep(grid, args.measure, args.trials, args.snr, RngStream(args.seed), args.axes, args.steps)
    summary = {
        "threshold": res.threshold,
        "probability": [float(p) for p in res.probability],
        "t_bars": [float(t) for t in res.t_bars],
        "monotone_2sigma": monotone_within(res.probability, res.stderr),
    }
    return ("t_bar", "trial", "detected", "snr", "dominant_freq"), res.trials, summary


def _gravity(args):
    from .geometry import ricci
    from .gravity_model import assemble_line_element, planck_mass_radius, schwarzschild_radius

    le = assemble_line_element(args.r_s)
    radii = args.r_s * np.logspace(math.log10(1 + 1e-6), 6, args.radii)
    rows = [(r / args.r_s, le.g_tt(r), le.g_rr(r), le.g_tt(r) * le.g_rr(r)) for r in radii]
    vacuum = float(np.abs(ricci(le.metric_field(), np.array([math.pi / 3, 0.0, 10 * args.r_s, 0.0]))).max())
    r1, lp = planck_mass_radius(1.0)
    r2, _ = planck_mass_radius(2.0)
    summary = {
        "schwarzschild_radius_m": schwarzschild_radius(args.mass, args.k),
        "planck_mass_radius_k1_over_lp": r1 / lp,
        "planck_mass_radius_k2_over_lp": r2 / lp,
        "max_ricci_at_10rs": vacuum,
        "max_product_error": float(max(abs(r[3] + 1) for r in rows)),
    }
    return ("r_over_rs", "g_tt", "g_rr", "product"), rows, summary


def _dwell(args):
    from .gravity_model import IndeterminacyField, dwell_slope, radial_migration_mc

    field = IndeterminacyField(args.r_s)
    prof = radial_migration_mc(field, args.start_r, args.walkers, args.steps, RngStream(args.seed), constant_u=args.constant_u)
    summary = {"absorbed": prof.absorbed}
    if args.r_s > 0 and args.constant_u is None:
        try:
            summary["slope"], summary["correlation"] = dwell_slope(prof, field)
        except ParameterDomainError as exc:
            summary["slope_error"] = str(exc)
    keep = prof.dwell_counts > 0
    rows = [row for row, k in zip(prof.csv_rows(), keep) if k]
    return ("r_mid", "dwell_count", "predicted_density"), rows, summary


def _demo_covariant(args):
    from .gravity_model import covariant_distance_demo

    rows = covariant_distance_demo(args.r_bar, args.r_s, args.samples)
    return ("r", "contravariant_distance", "covariant_coordinate"), rows, {"max_ratio": rows[-1][2] / rows[-1][0]}


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sgst", description="Stochastic space-time experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, handler, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
        p.add_argument("--workers", type=int, default=1, help="worker processes (never changes outputs)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--config", help="key = value file or manifest.json of an earlier run")
        p.set_defaults(handler=handler)
        return p

    p = command("interference", _interference, "Two-metric interference density on a phase grid.")
    p.add_argument("--variant", default="plane_wave_2016", choices=["two_slit_1976", "plane_wave_2016"])
    p.add_argument("--beta", type=float, default=0.0, help="second phase (rad)")
    p.add_argument("--alpha-grid", type=_grid, default=_grid("0:6.283185307179586:256"), help="start:stop:count (rad)")

    p = command("search", _search, "Coefficient-restricted transform search.")
    p.add_argument("--subspace", default="zt-block", choices=["full", "zt-block", "zt-2x2"])
    p.add_argument("--metric", default="two_slit_1976", choices=["two_slit_1976", "plane_wave_2016"])
    p.add_argument("--start", type=int, default=0, help="first subspace index")
    p.add_argument("--stop", type=int, default=None, help="end of the index range (exclusive)")
    p.add_argument("--stride", type=int, default=1, help="examine every stride-th index")
    p.add_argument(
        "--constraints", default="require_real_metric,require_invertible,dedupe_trivial",
        help="comma-separated constraint flags",
    )
    p.add_argument("--checkpoint", default=None, help="JSON checkpoint path (resumed if present)")
    p.add_argument("--long-run", type=_flag, nargs="?", const=True, default=False, help="allow scans above 5^12 candidates")

    p = command("verify-f", _verify_f, "Check the F1-F8 coordinate tables against their metrics.")
    p.add_argument("--phases", type=int, default=20, help="phase samples per table")

    p = command("ricci", _ricci, "Numerical Ricci tensor against closed forms (geometric units).")
    p.add_argument("--samples", type=int, default=10, help="random (k, omega, z, t) samples")
    p.add_argument("--b", type=float, default=0.0, help="also extract the first-order R_zt coefficient at this b")
    p.add_argument("--k", type=float, default=1.1, help="wave number (1/length)")
    p.add_argument("--omega", type=float, default=0.8, help="angular frequency (1/time)")
    p.add_argument("--z", type=float, default=0.3, help="z coordinate (length)")
    p.add_argument("--t", type=float, default=0.5, help="t coordinate (time)")

    p = command("geodesic", _geodesic, "RK4 geodesic, optionally with stochastic Christoffels (geometric units).")
    p.add_argument("--field", default="schwarzschild", choices=["minkowski", "schwarzschild", "plane_wave", "perturbed"])
    p.add_argument("--r-s", type=float, default=1.0, help="Schwarzschild radius (length)")
    p.add_argument("--r0", type=float, default=10.0, help="circular-orbit radius (length)")
    p.add_argument("--k", type=float, default=1.0, help="wave number (1/length)")
    p.add_argument("--omega", type=float, default=0.7, help="angular frequency (1/time)")
    p.add_argument("--b", type=float, default=1e-3, help="perturbation amplitude")
    p.add_argument("--velocity", default="0,0,0,1", help="initial dx/ds for non-Schwarzschild fields")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--ds", type=float, default=0.25, help="affine step")
    p.add_argument("--stochastic", type=_flag, nargs="?", const=True, default=False)
    p.add_argument("--indeterminacy", type=float, default=1.0, help="probability a step is perturbed")
    p.add_argument("--fluctuation", type=float, default=1e-3, help="std of metric-gradient kicks (1/length)")

    p = command("spread", _spread, "Iterated self-convolution of a step distribution.")
    p.add_argument("--distribution", default="uniform", choices=sorted(_SEED_DISTRIBUTIONS))
    p.add_argument("--n", type=int, default=200, help="number of convolution steps")

    p = command("walk", _walk, "Granular venue walk on the Planck lattice (units of l_p, t_p).")
    p.add_argument("--walkers", type=int, default=10000)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--measures", default="0.5,0.5,0.5,0.5", help="x,y,z,t measures (or one value for all)")
    p.add_argument("--indeterminacy", type=float, default=1.0)
    p.add_argument("--ds2", type=_flag, nargs="?", const=True, default=False, help="pair every spatial move with a time move")
    p.add_argument("--reversal-rate", type=float, default=0.0, help="per-step probability of a sequence reversal")
    p.add_argument("--record", type=int, default=10, help="walkers whose paths are written")

    p = command("uncertainty", _uncertainty, "Uncertainty product across averaging volumes.")
    p.add_argument("--sigma", type=float, default=1.0, help="per-cell std of the metric component")
    p.add_argument("--distribution", default="normal", choices=["normal", "uniform", "bimodal"])
    p.add_argument("--p-cov", type=float, default=1.0, help="covariant momentum")
    p.add_argument("--volumes", default="1,2,4,8,16", help="comma-separated volumes (cells of 1/cells-per-volume)")
    p.add_argument("--cells-per-volume", type=int, default=16)
    p.add_argument("--samples", type=int, default=4000)

    p = command("compton", _compton, "Sequence-time oscillation and its spectral detection (Planck times).")
    p.add_argument("--t-bar", type=float, default=32.0, help="half-period in Planck times")
    p.add_argument("--measure", type=float, default=1.0, help="angle measure; 1 is noiseless")
    p.add_argument("--axes", type=int, default=3, choices=[1, 3])
    p.add_argument("--steps", type=int, default=4096, help="Planck-time steps")
    p.add_argument("--snr", type=float, default=5.0, help="detection threshold over median background")

    p = command("sweep", _sweep, "Detection probability against the half-period.")
    p.add_argument("--t-bar-grid", type=_grid, default=_grid("0.5:10000:12"), help="start:stop:count, log-spaced")
    p.add_argument("--measure", type=float, default=0.7)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--snr", type=float, default=5.0)
    p.add_argument("--axes", type=int, default=3, choices=[1, 3])
    p.add_argument("--steps", type=int, default=None, help="steps per trial (default from the grid)")

    p = command("gravity", _gravity, "Assembled line element and Schwarzschild radii.")
    p.add_argument("--r-s", type=float, default=1.0, help="Schwarzschild radius (m)")
    p.add_argument("--radii", type=int, default=10000, help="number of sample radii")
    p.add_argument("--mass", type=float, default=1.98847e30, help="mass for R_s (kg)")
    p.add_argument("--k", type=float, default=2.0, help="R_s = k G m / c^2")

    p = command("dwell", _dwell, "Radial dwell profile under the indeterminacy gate (units of the step length).")
    p.add_argument("--r-s", type=float, default=100.0)
    p.add_argument("--start-r", type=int, default=300)
    p.add_argument("--walkers", type=int, default=100000)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--constant-u", type=float, default=None, help="override u(r) with a constant")

    p = command("demo-covariant", _demo_covariant, "Covariant coordinate r / (1 - r_s / r) near r_s.")
    p.add_argument("--r-bar", type=float, default=2.0, help="outer radius (m)")
    p.add_argument("--r-s", type=float, default=1.0, help="Schwarzschild radius (m)")
    p.add_argument("--samples", type=int, default=16)
    return parser


def _config_defaults(path: str, command: str) -> dict:
    text = Path(path).read_text()
    if path.endswith(".json"):
        doc = json.loads(text)
        if doc.get("experiment_name") != command:
            raise ParameterDomainError(f"manifest is for {doc.get('experiment_name')!r}, not {command!r}")
        values = {k: v for k, v in doc["parameters"]}
        values["seed"] = doc["seed"]
        return values
    values = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterDomainError(f"config line without '=': {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _subparser(parser, command):
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise _ParameterError(f"unknown subcommand {command!r}")


def _apply_config(parser, argv, args):
    sp = _subparser(parser, args.command)
    values = _config_defaults(args.config, args.command)
    actions = {a.dest: a for a in sp._actions}
    unknown = sorted(k for k in values if k not in actions or k in _RUNTIME_KEYS)
    if unknown:
        raise ParameterDomainError(f"unknown config keys: {', '.join(unknown)}")
    defaults = {}
    for key, value in values.items():
        action = actions[key]
        if isinstance(value, str) and action.type is not None:
            value = action.type(value)
        elif isinstance(value, list) and action.type is _grid:
            value = tuple(value)
        defaults[key] = value
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, args)
        if args.workers < 1:
            raise ParameterDomainError("--workers must be >= 1")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        header, rows, summary = args.handler(args)
        data_path = out / f"{args.command}.csv"
        _write_csv(data_path, header, rows)
        params = [
            (k, list(v) if isinstance(v, tuple) else v)
            for k, v in sorted(vars(args).items())
            if k not in _RUNTIME_KEYS and k != "seed"
        ]
        manifest = RunManifest(args.command, args.seed, params, summary=_jsonable(summary))
        manifest.add_output(data_path, out)
        manifest.write(out / "manifest.json")
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except (_ParameterError, argparse.ArgumentTypeError, ParameterDomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except NumericalFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def main() -> None:
    sys.exit(run())
