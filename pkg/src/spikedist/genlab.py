"""Spike-train generators and the simulation experiments.

Randomness is always drawn from generators derived from ``(seed, *keys)``
(see :func:`trial_rng`), so a trial gives the same numbers no matter which
worker runs it or in which order. In the precision/reliability sweep the same
per-trial stream is reused in every ``(p, sigma)`` cell: a cell only changes
the removal threshold and the jitter scale, never the underlying draws.
"""
from __future__ import annotations

import gc
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Bounds
from .registry import Metric, MetricParams, build_all

MAX_ATTEMPTS = 10 ** 6
NUDGE = 1e-6


class RejectionExhausted(RuntimeError):
    pass


class ShapeError(ValueError):
    pass


class EmptyBenchmark(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    """Generator settings. ``rate`` in Hz, times in ms.

    ``jitter_sigma`` is the standard deviation of the Gaussian jitter.
    """

    rate: float = 100.0
    duration: float = 200.0
    seed: int = 0
    jitter_sigma: float = 0.0
    removal_p: float = 0.0
    required_count: Optional[int] = None

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be >= 0")
        if not 0 <= self.removal_p <= 1:
            raise ValueError("removal_p must be in [0, 1]")
        if self.required_count is not None and self.required_count < 1:
            raise ValueError("required_count must be positive")

    @property
    def bounds(self) -> Bounds:
        return Bounds(0.0, self.duration)


@dataclass(frozen=True)
class SweepGrid:
    sigma_max: float = 20.0
    p_max: float = 0.8
    N: int = 20
    trials: int = 100

    def __post_init__(self):
        if not self.sigma_max > 0:
            raise ValueError("sigma_max must be positive")
        if not 0 < self.p_max < 1:
            raise ValueError("p_max must be in (0, 1)")
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.trials < 1:
            raise ValueError("trials must be positive")

    @property
    def p_values(self) -> np.ndarray:
        return np.linspace(0.0, self.p_max, self.N + 1)

    @property
    def sigma_values(self) -> np.ndarray:
        return np.linspace(0.0, self.sigma_max, self.N + 1)

    @property
    def dp(self) -> float:
        return self.p_max / self.N

    @property
    def dsigma(self) -> float:
        return self.sigma_max / self.N


@dataclass
class ExperimentReport:
    """Result arrays of one experiment.

    ``results`` maps a metric name to an array whose shape matches ``axes``;
    ``tables`` holds anything else worth emitting (correlations, fits, ...).
    """

    experiment: str
    axes: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    normalized: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def check_shapes(self):
        shape = tuple(len(v) for v in self.axes.values())
        for name, arr in {**self.results, **self.normalized}.items():
            if np.shape(arr) != shape:
                raise ShapeError(f"{name}: shape {np.shape(arr)} does not match axes {shape}")


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def normalize(values, how: str = "max") -> np.ndarray:
    """Scale by the maximum (or mean); an all-zero array is returned as is."""
    arr = np.asarray(values, dtype=np.float64)
    ref = np.max(arr) if how == "max" else np.mean(arr)
    return arr / ref if ref > 0 else arr.copy()


def separate(times: np.ndarray, bounds: Bounds) -> np.ndarray:
    """Sort and push coinciding spikes ``NUDGE`` ms apart inside ``bounds``."""
    t = np.sort(np.asarray(times, dtype=np.float64)).tolist()
    for i in range(1, len(t)):
        if t[i] <= t[i - 1]:
            t[i] = t[i - 1] + NUDGE
    if t and t[-1] > bounds.b:
        t[-1] = bounds.b
        for i in range(len(t) - 2, -1, -1):
            if t[i] >= t[i + 1]:
                t[i] = t[i + 1] - NUDGE
    return np.array(t)


def gen_poisson(cfg: GenConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Homogeneous Poisson train on ``[0, duration]``."""
    rng = trial_rng(cfg.seed) if rng is None else rng
    mean = cfg.rate * cfg.duration / 1000.0
    for _ in range(MAX_ATTEMPTS):
        n = rng.poisson(mean)
        if n == 0 or (cfg.required_count is not None and n != cfg.required_count):
            continue
        t = np.sort(rng.uniform(0.0, cfg.duration, n))
        keep = np.concatenate([[True], np.diff(t) > 1e-9])
        t = t[keep]
        if cfg.required_count is None or t.size == cfg.required_count:
            return t
    raise RejectionExhausted(f"no train after {MAX_ATTEMPTS} attempts")


def perturb(train, cfg: GenConfig, bounds: Bounds, rng: np.random.Generator | None = None,
            boundary: str = "clamp") -> np.ndarray:
    """Remove spikes with probability ``removal_p``, then jitter the rest.

    One uniform (removal) and one normal (jitter) draw is made per original
    spike, so for a fixed stream increasing ``p`` only removes more spikes and
    increasing ``sigma`` only scales the same offsets. Jittered spikes are
    clamped to the bounds; ``boundary="reject"`` instead redraws the jitter
    until every spike stays inside.
    """
    rng = trial_rng(cfg.seed) if rng is None else rng
    t = np.asarray(train, dtype=np.float64)
    for _ in range(MAX_ATTEMPTS):
        keep = rng.uniform(size=t.size) >= cfg.removal_p
        if keep.any():
            break
    else:
        raise RejectionExhausted("every spike was removed")
    for _ in range(MAX_ATTEMPTS):
        moved = t + cfg.jitter_sigma * rng.standard_normal(t.size)
        moved = moved[keep]
        if boundary == "clamp":
            moved = np.clip(moved, bounds.a, bounds.b)
            break
        if moved.min() >= bounds.a and moved.max() <= bounds.b:
            break
    else:
        raise RejectionExhausted("jitter keeps leaving the bounds")
    if cfg.jitter_sigma == 0:
        return np.sort(moved)
    return separate(moved, bounds)


def _pair_for(metric: Metric, raw: np.ndarray):
    return np.unique(raw) if metric.set_based else raw


def _evaluate(metrics, t, tbar_raw, bounds) -> list[float]:
    return [m(_pair_for(m, t), _pair_for(m, tbar_raw), bounds) for m in metrics]


INSERT_TRAIN = (20.0, 50.0, 75.0, 125.0, 180.0)
SHIFT_TRAIN = (10.0, 50.0, 75.0, 125.0, 150.0)
DEFAULT_SWEEP_METRICS = ("vr", "vp", "count", "schreiber", "kreuz-spike", "kreuz-isi", "ph",
                         "max", "convmax", "modulus", "locmax", "locmodulus")


def _sweep_positions(bounds: Bounds, step: float) -> np.ndarray:
    n = int(round(bounds.length / step))
    return bounds.a + step * np.arange(n + 1)


def run_insertion_sweep(T=INSERT_TRAIN, bounds: Bounds = Bounds(0, 200),
                        metrics: Sequence[str] = DEFAULT_SWEEP_METRICS, step: float = 1.0,
                        params: MetricParams = MetricParams()) -> ExperimentReport:
    """Distance between ``T`` and ``T`` plus one spike at each position.

    A spike inserted on top of an existing one is kept as a repeated spike;
    set-based distances see it merged away.
    """
    T = np.asarray(T, dtype=np.float64)
    ms = build_all(metrics, params)
    xs = _sweep_positions(bounds, step)
    out = np.empty((len(ms), xs.size))
    for k, x in enumerate(xs):
        out[:, k] = _evaluate(ms, T, np.sort(np.append(T, x)), bounds)
    rep = ExperimentReport("insert", axes={"x": xs},
                           results={m.name: out[i] for i, m in enumerate(ms)},
                           meta={"train": T.tolist(), "bounds": [bounds.a, bounds.b],
                                 "labels": {m.name: m.label for m in ms}})
    rep.check_shapes()
    return rep


def run_shift_sweep(T=SHIFT_TRAIN, shift_index: int = 3, bounds: Bounds = Bounds(0, 200),
                    metrics: Sequence[str] = DEFAULT_SWEEP_METRICS, step: float = 1.0,
                    params: MetricParams = MetricParams()) -> ExperimentReport:
    """Distance between ``T`` and ``T`` with one spike moved to each position.

    The moved spike may cross its neighbours (the train is re-sorted); landing
    exactly on another spike yields a repeated spike as in the insertion sweep.
    """
    T = np.asarray(T, dtype=np.float64)
    ms = build_all(metrics, params)
    xs = _sweep_positions(bounds, step)
    out = np.empty((len(ms), xs.size))
    for k, x in enumerate(xs):
        moved = T.copy()
        moved[shift_index] = x
        out[:, k] = _evaluate(ms, T, np.sort(moved), bounds)
    rep = ExperimentReport("shift", axes={"x": xs},
                           results={m.name: out[i] for i, m in enumerate(ms)},
                           meta={"train": T.tolist(), "shift_index": shift_index,
                                 "bounds": [bounds.a, bounds.b],
                                 "labels": {m.name: m.label for m in ms}})
    rep.check_shapes()
    return rep


@dataclass(frozen=True)
class BurstTemplate:
    """Three bursts and one isolated spike, plus the six edits applied to it."""

    bursts: tuple = ((50.0, 54.0, 58.0, 62.0), (150.0, 154.0, 158.0), (300.0, 304.0, 308.0, 312.0))
    isolated: float = 420.0
    bounds: tuple = (0.0, 500.0)
    setups: tuple = (
        ("A", "remove", 54.0),
        ("B", "remove", 308.0),
        ("C", "insert", 152.0),
        ("D", "insert", 306.0),
        ("E", "remove", 420.0),
        ("F", "insert", 230.0),
    )

    @property
    def train(self) -> np.ndarray:
        return np.sort(np.array([t for b in self.bursts for t in b] + [self.isolated]))


DEFAULT_BURST_METRICS = ("modulus", "max", "convmax", "vr", "vp", "schreiber",
                         "kreuz-spike", "kreuz-isi")


def run_burst_experiment(template: BurstTemplate = BurstTemplate(),
                         metrics: Sequence[str] = DEFAULT_BURST_METRICS,
                         params: MetricParams = MetricParams()) -> ExperimentReport:
    T = template.train
    bounds = Bounds(*template.bounds)
    ms = build_all(metrics, params)
    out = np.empty((len(ms), len(template.setups)))
    for k, (_, op, t) in enumerate(template.setups):
        if op == "remove":
            if t not in T:
                raise ValueError(f"setup removes {t}, which is not in the template")
            edited = T[T != t]
        else:
            edited = np.sort(np.append(T, t))
        out[:, k] = _evaluate(ms, T, edited, bounds)
    results = {m.name: out[i] for i, m in enumerate(ms)}
    rep = ExperimentReport(
        "burst", axes={"setup": [s[0] for s in template.setups]}, results=results,
        normalized={k: normalize(v) for k, v in results.items()},
        meta={"template": T.tolist(), "setups": [list(s) for s in template.setups],
              "normalization": "maximum over setups, per metric",
              "labels": {m.name: m.label for m in ms}})
    rep.check_shapes()
    return rep


DEFAULT_PR_METRICS = ("modulus", "max", "vp", "vp-0.001", "vr", "schreiber",
                      "kreuz-spike", "kreuz-isi")


def _pr_trial(args):
    template, bounds, sweep, names, params, seed, trial = args
    ms = build_all(names, params)
    out = np.empty((len(ms), sweep.N + 1, sweep.N + 1))
    for i, p in enumerate(sweep.p_values):
        for j, sigma in enumerate(sweep.sigma_values):
            cfg = GenConfig(jitter_sigma=float(sigma), removal_p=float(p), seed=seed)
            tbar = perturb(template, cfg, bounds, trial_rng(seed, 1, trial))
            out[:, i, j] = [m(template, tbar, bounds) for m in ms]
    return out


def delta_rho(rho, sweep: SweepGrid) -> np.ndarray:
    """Reliability-versus-precision dominance map.

    ``d(rho)/dp * dp - d(rho)/dsigma * dsigma`` with central differences in
    the interior and one-sided ones at the edges; rows are ``p``, columns
    ``sigma``. Positive values mean the metric reacts more to reliability.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != (sweep.N + 1, sweep.N + 1):
        raise ShapeError(f"expected a {(sweep.N + 1,) * 2} grid, got {rho.shape}")
    # a derivative times its own step is a plain difference in index units
    return np.gradient(rho, axis=0) - np.gradient(rho, axis=1)


def run_precision_reliability(template_cfg: GenConfig = GenConfig(rate=100.0, duration=200.0),
                              sweep: SweepGrid = SweepGrid(),
                              metrics: Sequence[str] = DEFAULT_PR_METRICS,
                              params: MetricParams = MetricParams(),
                              workers: int = 1) -> ExperimentReport:
    """Trial-averaged distance grids over removal probability and jitter."""
    bounds = template_cfg.bounds
    template = gen_poisson(template_cfg, trial_rng(template_cfg.seed, 0))
    jobs = [(template, bounds, sweep, tuple(metrics), params, template_cfg.seed, k)
            for k in range(sweep.trials)]
    total = np.zeros((len(metrics), sweep.N + 1, sweep.N + 1))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_pr_trial, jobs))
    else:
        parts = [_pr_trial(j) for j in jobs]
    for part in parts:          # fixed order: sums are bit-identical for any worker count
        total += part
    rho = total / sweep.trials
    results = {name: rho[i] for i, name in enumerate(metrics)}
    norm = {k: normalize(v) for k, v in results.items()}
    labels = {m.name: m.label for m in build_all(metrics, params)}
    rep = ExperimentReport(
        "precision-reliability",
        axes={"p": sweep.p_values, "sigma": sweep.sigma_values},
        results=results, normalized=norm,
        tables={"delta_rho": {k: delta_rho(v, sweep) for k, v in norm.items()}},
        meta={"template": template.tolist(), "sweep": asdict(sweep),
              "normalization": "maximum over the (p, sigma) grid, per metric",
              "jitter": "sigma is the standard deviation of the jitter (ms)",
              "caveat": "the sign of delta_rho can change with the sigma_max/p_max ratio",
              "labels": labels})
    rep.check_shapes()
    return rep


DEFAULT_CORR_METRICS = ("max", "modulus", "convmax", "schreiber", "kreuz-spike", "kreuz-isi",
                        "vr", "vp")


def run_correlation_experiment(cfg: GenConfig = GenConfig(rate=20.0, duration=500.0,
                                                          jitter_sigma=20.0, required_count=10),
                               trials: int = 1000,
                               metrics: Sequence[str] = DEFAULT_CORR_METRICS,
                               params: MetricParams = MetricParams(),
                               boundary: str = "reject") -> ExperimentReport:
    """Distances between Poisson trains and jittered copies, and their
    Pearson correlation with the van Rossum and Victor-Purpura distances.

    Both trains have exactly ``required_count`` spikes; with the default
    ``boundary="reject"`` a jitter that pushes a spike outside the interval
    is redrawn, mirroring the selection of trains that kept all their spikes.
    """
    bounds = cfg.bounds
    ms = build_all(metrics, params)
    out = np.empty((len(ms), trials))
    jitter = GenConfig(rate=cfg.rate, duration=cfg.duration, seed=cfg.seed,
                       jitter_sigma=cfg.jitter_sigma)
    for k in range(trials):
        rng = trial_rng(cfg.seed, 2, k)
        t = gen_poisson(cfg, rng)
        tbar = perturb(t, jitter, bounds, rng, boundary=boundary)
        out[:, k] = [m(t, tbar, bounds) for m in ms]
    results = {m.name: out[i] for i, m in enumerate(ms)}
    norm = {k: normalize(v, "mean") for k, v in results.items()}
    corr = {}
    for ref in ("vr", "vp"):
        if ref in results:
            corr[ref] = {k: float(np.corrcoef(v, results[ref])[0, 1]) for k, v in results.items()}
    rep = ExperimentReport(
        "correlation", axes={"trial": np.arange(trials)}, results=results, normalized=norm,
        tables={"correlation": corr},
        meta={"config": asdict(cfg), "boundary": boundary,
              "normalization": "mean over trials, per metric",
              "labels": {m.name: m.label for m in ms}})
    rep.check_shapes()
    return rep


SPEED_N = (5, 10, 20, 50, 100, 200, 500)


def linear_fit(x, y) -> dict:
    """Least-squares line ``y = slope * x + intercept`` with its R^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def run_speed_benchmark(n_values: Sequence[int] = SPEED_N, repeats: int = 100,
                        metrics: Sequence[str] = ("modulus", "modulus-alg1", "vr",
                                                  "vr-discrete", "kreuz-isi", "kreuz-spike"),
                        seed: int = 0, isi: float = 35.0,
                        params: MetricParams = MetricParams()) -> ExperimentReport:
    """Mean wall-clock time (ms) per distance call against the spike count.

    For each ``n`` a fresh pair of trains with ``n`` uniform spikes on
    ``[0, n * isi]`` is drawn per repeat; only the distance call is timed.
    """
    if repeats < 1:
        raise EmptyBenchmark("repeats must be at least 1")
    if not n_values:
        raise EmptyBenchmark("no spike counts given")
    ms = build_all(metrics, params)
    means = np.zeros((len(ms), len(n_values)))
    for j, n in enumerate(n_values):
        bounds = Bounds(0.0, n * isi)
        rng = trial_rng(seed, 3, n)
        pairs = [(np.sort(rng.uniform(0, n * isi, n)), np.sort(rng.uniform(0, n * isi, n)))
                 for _ in range(repeats)]
        for i, m in enumerate(ms):
            gc_was = gc.isenabled()
            gc.disable()
            try:
                elapsed = 0
                for a, b in pairs:
                    t0 = time.perf_counter_ns()
                    m(a, b, bounds)
                    elapsed += time.perf_counter_ns() - t0
            finally:
                if gc_was:
                    gc.enable()
            means[i, j] = elapsed / repeats / 1e6
    n_arr = np.asarray(n_values, dtype=np.float64)
    fits = {}
    for i, m in enumerate(ms):
        fit = linear_fit(n_arr, means[i]) if len(n_values) > 1 else {}
        if fit:
            fit["per_spike_ms"] = fit["slope"] / 2.0   # two trains of n spikes each
        fits[m.name] = fit
    rep = ExperimentReport("speed", axes={"n": list(n_values)},
                           results={}, tables={"fit": fits},
                           meta={"repeats": repeats, "isi": isi, "seed": seed,
                                 "labels": {m.name: m.label for m in ms}},
                           timings={m.name: means[i] for i, m in enumerate(ms)})
    return rep
