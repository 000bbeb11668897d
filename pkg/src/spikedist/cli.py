"""Command-line interface.

``spikedist distance`` compares trains read from a file; ``spikedist
experiment`` runs one of the simulation studies and writes CSV or JSON
documents. All times are in ms.

Exit codes: 0 success, 1 output could not be written, 2 bad arguments or
configuration, 3 malformed or invalid train file.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import genlab
from .core import Bounds, infer_bounds
from .io import ParseError, ValidationError, fmt, load_config, read_trains, to_csv, to_json
from .kernels import ParamError
from .registry import METRIC_NAMES, MetricParams, build

SEED_ENV = "SPIKEDIST_SEED"
EXIT_USAGE = 2
EXIT_INPUT = 3


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in ("tau", "tau_h", "tau_l", "q", "sigma", "step",
                                          "kernel_l", "tau_s", "tau_r")
            if getattr(args, k, None) is not None}


def _metric_flags(ap):
    g = ap.add_argument_group("metric parameters (ms, or 1/ms for --q)")
    g.add_argument("--tau", type=float, help="van Rossum and K kernel time constant (10)")
    g.add_argument("--tau-h", type=float, help="H kernel time constant (10)")
    g.add_argument("--tau-l", type=float, help="L kernel time constant (20)")
    g.add_argument("--tau-s", type=float, help="second L time constant (dexp, iaf)")
    g.add_argument("--tau-r", type=float, help="rise time constant of the iaf L kernel")
    g.add_argument("--kernel-l", choices=("exp", "alpha", "dexp", "iaf", "const"))
    g.add_argument("--q", type=float, help="Victor-Purpura shift cost (0.2)")
    g.add_argument("--sigma", type=float, help="Schreiber Gaussian width (10)")
    g.add_argument("--step", type=float, help="grid step of sampled metrics (1)")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spikedist", description=__doc__.split("\n")[0],
                                 epilog="All times are in milliseconds.")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("distance", help="distance between trains in a file")
    d.add_argument("--metric", choices=METRIC_NAMES, default="modulus")
    d.add_argument("--input", required=True, help="train file, one train per line ('-' for stdin)")
    d.add_argument("--bounds", type=float, nargs=2, metavar=("A", "B"),
                   help="observation interval (default: span of the trains)")
    d.add_argument("--merge-duplicates", action="store_true",
                   help="collapse repeated spike times instead of failing")
    d.add_argument("--pairs", choices=("first-two", "matrix"), default="first-two")
    d.add_argument("--seed", type=int, help=f"unused by distances; default ${SEED_ENV}")
    _metric_flags(d)

    e = sub.add_parser("experiment", help="run a simulation study")
    e.add_argument("name", choices=("insert", "shift", "burst", "precision-reliability",
                                    "correlation", "speed"))
    e.add_argument("--config", help="JSON file with experiment settings")
    e.add_argument("--out", default=".", help="output directory")
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or 0)")
    _metric_flags(e)
    return ap


def _read_input(args, bounds):
    if args.input == "-":
        from .io import parse_trains
        return parse_trains(sys.stdin.read(), bounds, args.merge_duplicates)
    try:
        return read_trains(args.input, bounds, args.merge_duplicates)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None


def cmd_distance(args, out) -> int:
    bounds = Bounds(*args.bounds) if args.bounds else None
    trains = _read_input(args, bounds)
    need = 2 if args.pairs == "first-two" else 1
    if len(trains) < need:
        raise ValidationError(0, f"need at least {need} trains, found {len(trains)}", "count")
    bounds = bounds or infer_bounds(*trains)
    metric = build(args.metric, MetricParams(**_overrides(args)))

    def pair(t1, t2):
        if metric.set_based:
            t1, t2 = np.unique(t1), np.unique(t2)
        return metric(t1, t2, bounds)

    if args.pairs == "first-two":
        out.write(fmt(pair(trains[0], trains[1])) + "\n")
        return 0
    n = len(trains)
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = pair(trains[i], trains[j])
    if not (np.array_equal(m, m.T) and not np.any(np.diag(m))):
        raise RuntimeError("distance matrix is not symmetric with a zero diagonal")
    header = [""] + [f"T{i}" for i in range(n)]
    out.write(to_csv(header, ([f"T{i}", *row] for i, row in enumerate(m))))
    return 0


def _pick(cls, cfg: dict, **extra):
    names = {f.name for f in fields(cls)}
    unknown = set(cfg) - names
    if unknown:
        raise UsageError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**{**cfg, **extra})


CONFIG_KEYS = {
    "insert": {"train", "bounds", "step"},
    "shift": {"train", "bounds", "step", "shift_index"},
    "burst": {"bursts", "isolated", "bounds", "setups"},
    "precision-reliability": {"template", "sweep", "workers"},
    "correlation": {"gen", "trials", "boundary"},
    "speed": {"n", "repeats", "isi"},
}


def _run(name, cfg: dict, seed: int, overrides: dict | None = None):
    """Run experiment ``name``; command-line metric flags beat config ``params``."""
    unknown = set(cfg) - CONFIG_KEYS[name] - {"params", "metrics"}
    if unknown:
        raise UsageError(f"unknown {name} config keys: {sorted(unknown)}")
    cfg = dict(cfg)
    params = replace(_pick(MetricParams, cfg.pop("params", {})), **(overrides or {}))
    kw = {}
    if "metrics" in cfg:
        kw["metrics"] = tuple(cfg.pop("metrics"))
    if name in ("insert", "shift"):
        if "train" in cfg:
            kw["T"] = tuple(cfg.pop("train"))
        if "bounds" in cfg:
            kw["bounds"] = Bounds(*cfg.pop("bounds"))
        if "step" in cfg:
            kw["step"] = float(cfg.pop("step"))
        if name == "shift" and "shift_index" in cfg:
            kw["shift_index"] = int(cfg.pop("shift_index"))
        fn = genlab.run_insertion_sweep if name == "insert" else genlab.run_shift_sweep
        rep = fn(params=params, **kw)
    elif name == "burst":
        tpl = {k: cfg.pop(k) for k in ("bursts", "isolated", "bounds", "setups") if k in cfg}
        tpl = {k: (tuple(map(tuple, v)) if k in ("bursts", "setups")
                   else tuple(v) if k == "bounds" else v) for k, v in tpl.items()}
        rep = genlab.run_burst_experiment(genlab.BurstTemplate(**tpl), params=params, **kw)
    elif name == "precision-reliability":
        tcfg = _pick(genlab.GenConfig, {"rate": 100.0, "duration": 200.0,
                                        **cfg.pop("template", {})}, seed=seed)
        sweep = _pick(genlab.SweepGrid, cfg.pop("sweep", {}))
        rep = genlab.run_precision_reliability(tcfg, sweep, params=params,
                                               workers=int(cfg.pop("workers", 1)), **kw)
    elif name == "correlation":
        gcfg = _pick(genlab.GenConfig, {"rate": 20.0, "duration": 500.0, "jitter_sigma": 20.0,
                                        "required_count": 10, **cfg.pop("gen", {})}, seed=seed)
        rep = genlab.run_correlation_experiment(gcfg, int(cfg.pop("trials", 1000)), params=params,
                                                boundary=cfg.pop("boundary", "reject"), **kw)
    else:
        rep = genlab.run_speed_benchmark(tuple(cfg.pop("n", genlab.SPEED_N)),
                                         int(cfg.pop("repeats", 100)), seed=seed,
                                         isi=float(cfg.pop("isi", 35.0)), params=params, **kw)
    return rep


def _tables(rep: genlab.ExperimentReport) -> dict[str, tuple[list, list]]:
    """CSV tables (header, rows) keyed by file stem."""
    name = rep.experiment
    if name in ("insert", "shift"):
        keys = list(rep.results)
        xs = rep.axes["x"]
        return {name: (["x", *keys], [[x, *(rep.results[k][i] for k in keys)]
                                      for i, x in enumerate(xs)])}
    if name == "burst":
        keys = list(rep.results)
        setups = rep.axes["setup"]
        norm = [[s, *(rep.normalized[k][i] for k in keys)] for i, s in enumerate(setups)]
        raw = [[s, *(rep.results[k][i] for k in keys)] for i, s in enumerate(setups)]
        return {"burst": (["setup", *keys], norm), "burst_raw": (["setup", *keys], raw)}
    if name == "precision-reliability":
        ps, ss = rep.axes["p"], rep.axes["sigma"]
        grid, sections = [], []
        for k in rep.results:
            rho, nrm, dr = rep.results[k], rep.normalized[k], rep.tables["delta_rho"][k]
            for i, p in enumerate(ps):
                for j, s in enumerate(ss):
                    grid.append([k, p, s, rho[i, j], nrm[i, j], dr[i, j], int(np.sign(dr[i, j]))])
            sections += [[k, "p", p, nrm[i, 0]] for i, p in enumerate(ps)]
            sections += [[k, "sigma", s, nrm[0, j]] for j, s in enumerate(ss)]
        return {"pr_grid": (["metric", "p", "sigma", "rho", "rho_normalized", "delta_rho",
                             "delta_rho_sign"], grid),
                "pr_sections": (["metric", "axis", "value", "rho_normalized"], sections)}
    if name == "correlation":
        corr = rep.tables["correlation"]
        keys = list(rep.results)
        rows = [[k, corr.get("vr", {}).get(k, float("nan")), corr.get("vp", {}).get(k, float("nan"))]
                for k in keys]
        samples = [[i, *(rep.normalized[k][i] for k in keys)]
                   for i in range(len(rep.axes["trial"]))]
        return {"correlation": (["metric", "corr_vr", "corr_vp"], rows),
                "correlation_samples": (["trial", *keys], samples)}
    fits = rep.tables["fit"]
    times = [[k, n, rep.timings[k][j]] for k in rep.timings for j, n in enumerate(rep.axes["n"])]
    fit_rows = [[k, f.get("per_spike_ms"), f.get("slope"), f.get("intercept"), f.get("r2")]
                for k, f in fits.items()]
    return {"speed": (["metric", "n", "mean_ms"], times),
            "speed_fit": (["metric", "per_spike_ms", "slope", "intercept", "r2"], fit_rows)}


def _document(rep: genlab.ExperimentReport, seed: int) -> dict:
    return {"experiment": rep.experiment, "seed": seed, "axes": rep.axes,
            "results": rep.results, "normalized": rep.normalized, "tables": rep.tables,
            "meta": rep.meta, "timings": rep.timings}


def cmd_experiment(args, out) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        cfg = load_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad config {args.config}: {exc}") from None
    try:
        rep = _run(args.name, cfg, seed, _overrides(args))
    except (TypeError, KeyError, ValueError) as exc:
        raise UsageError(f"{args.name}: {exc}") from None

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        docs = {args.name.replace("-", "_") + ".json": to_json(_document(rep, seed))}
    else:
        docs = {f"{stem}.csv": to_csv(h, rows) for stem, (h, rows) in _tables(rep).items()}
    written = []
    try:
        for fname, text in docs.items():
            path = outdir / fname
            path.write_text(text)
            written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    for path in written:
        out.write(f"{path}\n")
    return 0


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = _parser().parse_args(argv)
    try:
        if args.command == "distance":
            return cmd_distance(args, out)
        return cmd_experiment(args, out)
    except (ParseError, ValidationError) as exc:
        print(f"spikedist: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, ParamError, ValueError) as exc:
        print(f"spikedist: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"spikedist: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
