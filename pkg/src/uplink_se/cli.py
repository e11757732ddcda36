"""Command-line front end: ``uplink-se run|optimize --spec FILE --out FILE``.

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 capacity error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import fields, is_dataclass, replace
from pathlib import Path

from . import __version__
from . import asymptotic, optimizer, rmt
from .config import ASYMPTOTIC_SCHEMES, RunSpec, load_spec
from .errors import ConfigError, NumericalError, UplinkError
from .finite import finite_rates, rate_linear_finite

RUN_COLUMNS = ("scheme", "backend", "sweep_variable", "sweep_value", "se_bits", "std_error", "trials",
               "a_samples", "seed", "wall_time_s")
OPTIMIZE_COLUMNS = ("rank", "intervals", "clusters", "zetas", "se_bits", "std_error")


def _jsonable(obj):
    if is_dataclass(obj):
        return {"kind": type(obj).__name__, **{f.name: _jsonable(getattr(obj, f.name)) for f in fields(obj)}}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _metadata(spec: RunSpec, command: str, extra=None) -> dict:
    return {
        "tool": "uplink-se",
        "version": __version__,
        "command": command,
        "seed": spec.seed,
        "spec": spec.source,
        "resolved": {
            "network": _jsonable(spec.network),
            "scenario": _jsonable(spec.scenario),
            "schemes": list(spec.schemes),
            "backend": spec.backend,
            "trials": spec.trials,
            "a_samples": spec.a_samples,
            "sweep": _jsonable(spec.sweep),
            "td_zetas": spec.td_zetas,
            "finite_correction": spec.finite_correction,
        },
        "constants": {
            "eta_tolerance": rmt.DEFAULT_TOL,
            "eta_floor": rmt.ETA_FLOOR,
            "eta_max_iter": rmt.MAX_ITER,
            "shadowing_convention": "amplitude: d = 10**(G/20) / C**2, G ~ N(0, std_db**2)",
            "snr_convention": "noise_power = 10**(-snr_db/10), unit transmit power",
            "optimizer_max_cells": optimizer.MAX_CELLS,
            "zeta_fixed_point_tolerance": asymptotic.ZETA_TOL,
        },
        **(extra or {}),
    }


def _fmt(x) -> str:
    return "" if x is None else repr(float(x)) if isinstance(x, float) else str(x)


def _write_csv(path: Path, columns, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def _write_meta(path: Path, meta: dict):
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _row(spec, scheme, backend, value, rep, samples, elapsed):
    return {
        "scheme": scheme, "backend": backend,
        "sweep_variable": spec.sweep.variable if spec.sweep else "",
        "sweep_value": value, "se_bits": rep.se_bits, "std_error": rep.std_error,
        "trials": spec.trials if backend == "finite" else "",
        "a_samples": samples if backend == "asymptotic" else "",
        "seed": spec.seed, "wall_time_s": round(elapsed, 6),
    }


def _cell(scheme, backend, value, fn):
    """Run one evaluation, naming the failing cell on numerical errors."""
    try:
        return fn()
    except NumericalError as exc:
        raise NumericalError(f"{scheme}/{backend} at sweep value {value}: {exc}", trial=exc.trial,
                             bracket=exc.bracket) from exc


def run_spec(spec: RunSpec, threads: int = 1) -> list[dict]:
    rows = []
    finite = spec.backend in ("finite", "both")
    asym = spec.backend in ("asymptotic", "both")
    for value, net, scen in spec.points():
        results = {}  # (scheme, backend) -> (report, wall time)
        joint = [s for s in spec.schemes if s in ("IAN", "SD", "TD")]
        if finite and joint:
            t0 = time.perf_counter()
            reps = _cell("/".join(joint), "finite", value,
                         lambda: finite_rates(net, scen, spec.trials, spec.seed, None, threads))
            dt = time.perf_counter() - t0
            for s in joint:
                results[(s, "finite")] = (reps[s], dt)
        if finite:
            for s in spec.schemes:
                if s in ("LinearMF", "LinearMMSE"):
                    t0 = time.perf_counter()
                    rep = _cell(s, "finite", value, lambda: rate_linear_finite(
                        net, scen, s[len("Linear"):], spec.trials, spec.seed, threads))
                    results[(s, "finite")] = (rep, time.perf_counter() - t0)
        asym_schemes = [s for s in spec.schemes if s in ASYMPTOTIC_SCHEMES]
        if asym and asym_schemes:
            t0 = time.perf_counter()
            inputs = _cell("inputs", "asymptotic", value, lambda: asymptotic.build_asymptotic_inputs(
                net, scen, spec.a_samples, spec.seed, spec.finite_correction))
            shared = time.perf_counter() - t0
            for s in asym_schemes:
                t0 = time.perf_counter()
                if s == "IAN":
                    fn = lambda: asymptotic.rate_ian_asym(inputs)
                elif s == "SD":
                    fn = lambda: asymptotic.rate_sd_asym(inputs)
                elif s == "TD" and spec.td_zetas == "optimal":
                    fn = lambda: asymptotic.optimal_zetas(inputs)[1]
                elif s == "TD":
                    fn = lambda: asymptotic.rate_td_asym(inputs)
                else:
                    def fn():
                        res = optimizer.optimize_os(inputs)
                        return replace(asymptotic.rate_os_asym(inputs, res.best), std_error=res.std_error)
                rep = _cell(s, "asymptotic", value, fn)
                results[(s, "asymptotic")] = (rep, shared + time.perf_counter() - t0)
        for s in spec.schemes:
            for backend in ("finite", "asymptotic"):
                if (s, backend) in results:
                    rep, dt = results[(s, backend)]
                    rows.append(_row(spec, s, backend, value, rep, spec.a_samples, dt))
    return rows


def optimize_spec(spec: RunSpec) -> list[dict]:
    if spec.sweep is not None:
        raise ConfigError("optimize evaluates a single point; remove the sweep section")
    optimizer.check_capacity(spec.network.cells)
    inputs = asymptotic.build_asymptotic_inputs(spec.network, spec.scenario, spec.a_samples, spec.seed,
                                                spec.finite_correction)
    res = optimizer.optimize_os(inputs)
    return [
        {
            "rank": i + 1,
            "intervals": r.configuration.interval_string(),
            "clusters": r.configuration.cluster_string(),
            "zetas": ";".join(repr(float(z)) for z in r.configuration.zetas),
            "se_bits": r.se_bits,
            "std_error": r.std_error,
        }
        for i, r in enumerate(res.table)
    ]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uplink-se", description="Uplink massive MIMO spectral efficiency simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "evaluate schemes over an optional sweep"),
                        ("optimize", "rank every optimized-scheme layout")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--spec", required=True, help="YAML run specification")
        s.add_argument("--out", required=True, help="output CSV path (metadata goes to OUT.meta.json)")
        s.add_argument("--seed", type=int, default=None, help="override the spec seed")
        s.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo (0 = auto)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 0:
            raise ConfigError("--threads must be nonnegative")
        spec = load_spec(args.spec)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            spec = replace(spec, seed=args.seed)
        out = Path(args.out)
        if args.command == "run":
            rows = run_spec(spec, args.threads)
            _write_csv(out, RUN_COLUMNS, rows)
        else:
            rows = optimize_spec(spec)
            _write_csv(out, OPTIMIZE_COLUMNS, rows)
        _write_meta(out, _metadata(spec, args.command, {"rows": len(rows)}))
    except UplinkError as exc:
        where = f"{args.spec}: " if isinstance(exc, ConfigError) else ""
        print(f"error: {where}{exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
