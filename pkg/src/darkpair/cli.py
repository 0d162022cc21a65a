"""Command-line interface: ``derive``, ``evolve``, ``sweep`` and ``validate``.

Exit codes: 0 ok, 2 configuration error, 3 oracle guard, 4 numerical guard.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import fock, gaussian, ideal
from .errors import ConfigError, NumericalGuardError, OracleGuardError
from .params import (
    DEFAULT_THRESHOLD,
    derive_rates,
    load_params,
    optimal_time_variance,
    predict_optimal_detuning,
    predict_optimal_squeezing,
    predict_optimal_time,
    regime_check,
)
from .sweep import OUTPUTS, Axis, SweepSpec, columns, run_sweep

log = logging.getLogger("darkpair")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_ORACLE, EXIT_NUMERIC = 0, 2, 3, 4
TIME_SERIES_COLUMNS = (
    "t", "xi_t", "var_y_plus", "var_y_minus", "var_x_plus", "var_x_minus",
    "min_var", "n_polariton", "n_spinwave",
)
BOSONIC_LIMIT = 0.1


def load_config(path):
    """Read a JSON config: the PhysicalParams fields plus ``schema_version``."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if "schema_version" not in raw:
        raise ConfigError(f"{path}: missing field(s): schema_version")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported schema_version {raw['schema_version']!r}")
    try:
        return load_params(path, extra_keys=("schema_version",))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _clean(obj):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_json(path, obj):
    with _output(path) as fh:
        json.dump(_clean(obj), fh, indent=2)
        fh.write("\n")


def write_time_series(fh, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TIME_SERIES_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])


def gaussian_rows(states, xi):
    rows = []
    for s in states:
        y_p, y_m, x_p, x_m = gaussian.variances(s)
        n_p, n_s = gaussian.excitations(s)
        rows.append((s.time, xi * s.time, y_p, y_m, x_p, x_m, gaussian.minimal_variance(s), n_p, n_s))
    return rows


def ideal_rows(times, xi):
    rows = []
    for t in times:
        r = abs(xi) * t
        squeezed, anti = ideal.ideal_variances(r)
        n = ideal.ideal_excitations(r)
        rows.append((t, xi * t, squeezed, anti, anti, squeezed, squeezed, n, n))
    return rows


def oracle_rows(series, xi):
    rows = []
    for f in series.states:
        mean, cov = fock.moments(f)
        s = gaussian.GaussianState.from_cov(mean, cov, f.time)
        y_p, y_m, x_p, x_m = gaussian.variances(s)
        n_p, n_s = gaussian.excitations(s)
        rows.append((f.time, xi * f.time, y_p, y_m, x_p, x_m, gaussian.minimal_variance(s), n_p, n_s))
    return rows


def default_horizon(d) -> float:
    """Twice the predicted optimal time, long enough to see squeezing turn over."""
    try:
        return 2 * predict_optimal_time(d)
    except ValueError as exc:
        raise ConfigError(f"no default horizon ({exc}); pass --t-final") from exc


def oracle_step(m, cutoff) -> float:
    rate, _ = gaussian.stability_bound(m)
    return gaussian.max_step(m) if rate == 0 else min(gaussian.max_step(m), 0.1 / (rate * (cutoff + 1)))


def cmd_derive(args) -> int:
    p = load_config(args.config)
    d = derive_rates(p)
    report = {
        "params": p.to_dict(),
        "derived": asdict(d),
        "regime": regime_check(p, args.threshold).to_dict(),
        "delta_opt": predict_optimal_detuning(p),
        "optimal_squeezing": predict_optimal_squeezing(p),
    }
    try:
        report["t_star"] = predict_optimal_time(d)
        report["variance_at_t_star"] = optimal_time_variance(d)
    except ValueError as exc:
        report["t_star"] = None
        report["t_star_error"] = str(exc)
    _write_json(args.out, report)
    return EXIT_OK


def cmd_evolve(args) -> int:
    p = load_config(args.config)
    d = derive_rates(p)
    t_final = args.t_final if args.t_final is not None else default_horizon(d)
    m = gaussian.build_model(p, d, polariton_noise=args.polariton_noise)
    if not m.report.overall:
        log.warning("regime check failed: %s", ", ".join(m.report.failed()))
    dt = args.dt if args.dt is not None else gaussian.max_step(m)
    if not math.isfinite(dt):
        dt = max(t_final, 1.0)

    if args.mode == "oracle":
        if args.cutoff is None:
            raise ConfigError("--oracle requires --cutoff")
        dt = args.dt if args.dt is not None else oracle_step(m, args.cutoff)
        n_steps = max(1, math.ceil(t_final / dt))
        series = fock.oracle_evolve(m, t_final, dt, args.cutoff, record_every=max(1, n_steps // 100))
        if series.flagged:
            log.warning("truncation health: top-layer population %.3g >= %g",
                        series.max_top_population, fock.TRUNCATION_TOL)
        rows = oracle_rows(series, d.xi)
    elif args.mode == "ideal":
        times = gaussian.step_times(t_final, dt) if t_final > 0 else np.array([0.0])
        rows = ideal_rows(times, d.xi)
    else:
        states = gaussian.evolve(m, t_final, dt)
        rows = gaussian_rows(states, d.xi)

    fraction = max(max(r[7], r[8]) for r in rows) / p.n_atoms
    if fraction > BOSONIC_LIMIT:
        log.warning("excitations reach n/N = %.3g; bosonic approximation is unreliable above %g",
                    fraction, BOSONIC_LIMIT)
    with _output(args.out) as fh:
        write_time_series(fh, rows)
    return EXIT_OK


def cmd_sweep(args) -> int:
    p = load_config(args.config)
    if not 1 <= len(args.axis) <= 2:
        raise ConfigError("give one or two --axis options")
    axes = [Axis.parse(a) for a in args.axis]
    outputs = tuple(o.strip() for o in args.outputs.split(",")) if args.outputs else OUTPUTS
    spec = SweepSpec(axes[0], p, axes[1] if len(axes) == 2 else None, outputs,
                     polariton_noise=args.polariton_noise, dt=args.dt)
    rows = run_sweep(spec, args.jobs)
    cols = columns(spec)
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([row[c] if c == "error" else _fmt(row[c]) for c in cols])
    failed = sum(1 for r in rows if r["error"])
    if failed:
        log.warning("%d of %d sweep points failed", failed, len(rows))
    return EXIT_OK


def cmd_validate(args) -> int:
    p = load_config(args.config)
    d = derive_rates(p)
    m = gaussian.build_model(p, d, polariton_noise=args.polariton_noise)
    dt = args.dt if args.dt is not None else oracle_step(m, args.cutoff)
    series = fock.oracle_evolve(m, args.t_final, dt, args.cutoff)
    engine_model = replace(m, diffusion_scale=args.diffusion_scale)
    engine = gaussian.evolve(engine_model, args.t_final, min(dt, gaussian.max_step(m)), record_every=None)[-1]
    report = fock.compare_moments(engine, series[-1])
    report["truncation_flagged"] = series.flagged
    report["max_top_population"] = series.max_top_population
    report["max_trace_drift"] = series.max_trace_drift
    _write_json(args.out, report)
    if series.flagged:
        log.error("truncation health failed: top-layer population %.3g", series.max_top_population)
        return EXIT_ORACLE
    if not report["pass"]:
        log.error("engine/oracle mismatch: %s", ", ".join(report["failed_moments"]) or "gaussianity")
        return 1
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="darkpair", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON parameter file")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        return p

    def noise(p):
        p.add_argument("--polariton-noise", type=float, default=gaussian.DEFAULT_POLARITON_NOISE,
                       help="reservoir occupation of the polariton loss channel")

    p = common(sub.add_parser("derive", help="derived rates, regime checks and optima"))
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=cmd_derive)

    p = common(sub.add_parser("evolve", help="time series CSV"))
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--cutoff", type=int, default=None)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--ideal", dest="mode", action="store_const", const="ideal")
    mode.add_argument("--gaussian", dest="mode", action="store_const", const="gaussian")
    mode.add_argument("--oracle", dest="mode", action="store_const", const="oracle")
    p.set_defaults(mode="gaussian", func=cmd_evolve)
    noise(p)

    p = common(sub.add_parser("sweep", help="1-D or 2-D parameter grid"))
    p.add_argument("--axis", action="append", default=[], help="name:min:max:points[:log,rel]")
    p.add_argument("--outputs", default=None, help=f"comma list from {','.join(OUTPUTS)}")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dt", type=float, default=None)
    p.set_defaults(func=cmd_sweep)
    noise(p)

    p = common(sub.add_parser("validate", help="engine vs Fock-oracle moment comparison"))
    p.add_argument("--cutoff", type=int, required=True)
    p.add_argument("--t-final", type=float, required=True)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--diffusion-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)
    noise(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OracleGuardError as exc:
        log.error("%s", exc)
        return EXIT_ORACLE
    except NumericalGuardError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
