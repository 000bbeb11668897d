"""Classical spike-train distances used for comparison.

Spike count, van Rossum (exact and sampled), Victor-Purpura, Schreiber et al.
correlation distance, and the Kreuz ISI- and SPIKE-distances.

The Kreuz distances follow their published definitions with auxiliary spikes
added at both bounds. Both profiles are piecewise constant/linear between the
merged spikes, so they are integrated exactly rather than sampled.
"""
from __future__ import annotations

import math

import numpy as np

from .core import Bounds, infer_bounds
from .kernels import ParamError
from .metrics import DEFAULT_GRID, GridSpec, squared_trace_integral

#: van Rossum tail is integrated up to ``b + VR_TAIL * tau``.
VR_TAIL = 8.0


class DegenerateNorm(ValueError):
    pass


def _check_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ParamError(f"{name} must be positive and finite, got {value!r}")


def _canonical(t1, t2):
    # fixed argument order so that every distance is bitwise symmetric
    a = np.asarray(t1, dtype=np.float64).tolist()
    b = np.asarray(t2, dtype=np.float64).tolist()
    return (a, b) if (len(a), a) >= (len(b), b) else (b, a)


def spike_count_distance(t1, t2) -> float:
    n1, n2 = len(t1), len(t2)
    return abs(n1 - n2) / max(n1, n2)


def _markage_self(t, tau):
    # sum_{i,j} exp(-|t_i - t_j| / tau) over a sorted train
    total, m, last = 0.0, 0.0, None
    for x in t:
        if last is not None:
            m = (m + 1.0) * math.exp(-(x - last) / tau)
        total += 1.0 + 2.0 * m
        last = x
    return total


def _markage_cross(t1, t2, tau):
    # sum_{i,j} exp(-|t1_i - t2_j| / tau), one merge pass
    total = 0.0
    run = [0.0, 0.0]   # decayed sums of the spikes seen so far, per train
    last = None
    events = sorted([(x, 0) for x in t1] + [(x, 1) for x in t2])
    for x, k in events:
        if last is not None:
            decay = math.exp(-(x - last) / tau)
            run[0] *= decay
            run[1] *= decay
        total += run[1 - k]
        run[k] += 1.0
        last = x
    return total


def van_rossum_exact(t1, t2, tau: float = 10.0) -> float:
    """Exact ``int (g - g')^2 ds`` over the real line.

    Uses ``int g_i g_j = tau/2 exp(-|t_i - t_j| / tau)`` with running
    ("markage") sums, so the cost is linear in the number of spikes.
    """
    _check_positive("tau", tau)
    t1, t2 = _canonical(t1, t2)
    if t1 == t2:
        return 0.0   # the three sums cancel only up to rounding
    val = _markage_self(t1, tau) + _markage_self(t2, tau) - 2.0 * _markage_cross(t1, t2, tau)
    return max(0.0, 0.5 * tau * val)


def van_rossum_discrete(t1, t2, tau: float = 10.0, bounds: Bounds | None = None,
                        grid: GridSpec = DEFAULT_GRID) -> float:
    """van Rossum distance by trapezoids on ``[a, b + 8 tau]``.

    The grid is refined with the spike times and both one-sided limits of the
    traces are used there, so the jumps do not smear into the neighbouring
    cells.
    """
    _check_positive("tau", tau)
    bounds = infer_bounds(t1, t2) if bounds is None else bounds
    ext = Bounds(bounds.a, bounds.b + VR_TAIL * tau)
    s = grid.points(ext)
    s = np.union1d(s, np.concatenate([np.asarray(t1, float), np.asarray(t2, float)]))
    return squared_trace_integral(t1, t2, tau, s)


def victor_purpura(t1, t2, q: float = 0.2) -> float:
    """Minimum edit cost: insert/delete 1, shift by ``dt`` costs ``q |dt|``."""
    if not (q >= 0 and math.isfinite(q)):
        raise ParamError(f"q must be finite and >= 0, got {q!r}")
    a, b = _canonical(t1, t2)
    prev = [float(j) for j in range(len(b) + 1)]
    for i, x in enumerate(a, 1):
        row = [float(i)]
        for j, y in enumerate(b, 1):
            row.append(min(prev[j] + 1.0, row[j - 1] + 1.0, prev[j - 1] + q * abs(x - y)))
        prev = row
    return prev[-1]


def gaussian_filtered(train, sigma, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    train = np.asarray(train, dtype=np.float64)
    out = np.zeros(x.size)
    rows = max(1, (1 << 22) // max(1, train.size))
    for lo in range(0, x.size, rows):
        d = x[lo:lo + rows, None] - train[None, :]
        out[lo:lo + rows] = np.exp(-d * d / (2 * sigma * sigma)).sum(axis=1)
    return out


def schreiber_distance(t1, t2, sigma: float = 10.0, bounds: Bounds | None = None,
                       grid: GridSpec = DEFAULT_GRID) -> float:
    """``1 - cos`` angle between Gaussian-filtered trains sampled on the grid."""
    _check_positive("sigma", sigma)
    bounds = infer_bounds(t1, t2) if bounds is None else bounds
    x = GridSpec(grid.step, False).points(bounds)
    f1 = gaussian_filtered(t1, sigma, x)
    f2 = gaussian_filtered(t2, sigma, x)
    n1, n2 = math.sqrt(float(f1 @ f1)), math.sqrt(float(f2 @ f2))
    if n1 == 0.0 or n2 == 0.0:
        raise DegenerateNorm("a filtered train vanishes on the grid")
    if np.array_equal(f1, f2):
        return 0.0
    return float(min(1.0, max(0.0, 1.0 - float(f1 @ f2) / (n1 * n2))))


def with_edges(train, bounds: Bounds) -> np.ndarray:
    """Train with auxiliary spikes at ``a`` and ``b`` (not duplicated)."""
    t = np.asarray(train, dtype=np.float64)
    return np.unique(np.concatenate([[bounds.a], t, [bounds.b]]))


def _intervals(e1, e2):
    """Merged event times and, per elementary interval, the surrounding
    spike indices of each edge-padded train."""
    u = np.union1d(e1, e2)
    mid = 0.5 * (u[1:] + u[:-1])
    j1 = np.searchsorted(e1, mid) - 1
    j2 = np.searchsorted(e2, mid) - 1
    return u, j1, j2


def kreuz_isi(t1, t2, bounds: Bounds | None = None) -> float:
    """ISI-distance: time average of ``|x1 - x2| / max(x1, x2)`` where ``x``
    is the current inter-spike interval of each train."""
    bounds = infer_bounds(t1, t2) if bounds is None else bounds
    e1, e2 = with_edges(t1, bounds), with_edges(t2, bounds)
    u, j1, j2 = _intervals(e1, e2)
    x1 = e1[j1 + 1] - e1[j1]
    x2 = e2[j2 + 1] - e2[j2]
    ratio = np.abs(x1 - x2) / np.maximum(x1, x2)
    return float(np.sum(ratio * np.diff(u)) / bounds.length)


def _nearest(train, x):
    idx = np.searchsorted(train, x)
    lo = train[np.clip(idx - 1, 0, train.size - 1)]
    hi = train[np.clip(idx, 0, train.size - 1)]
    return np.minimum(np.abs(x - lo), np.abs(hi - x))


def kreuz_spike(t1, t2, bounds: Bounds | None = None) -> float:
    """Improved (2013) SPIKE-distance, integrated exactly.

    Within an interval between consecutive merged spikes the dissimilarity
    profile is linear, so the trapezoid rule on the one-sided limits is exact.
    """
    bounds = infer_bounds(t1, t2) if bounds is None else bounds
    e1, e2 = with_edges(t1, bounds), with_edges(t2, bounds)
    u, j1, j2 = _intervals(e1, e2)

    def local(e, other, j, t):
        tp, tf = e[j], e[j + 1]
        isi = tf - tp
        dp, df = _nearest(other, tp), _nearest(other, tf)
        return (dp * (tf - t) + df * (t - tp)) / isi, isi

    total = 0.0
    for t in (u[:-1], u[1:]):
        s1, x1 = local(e1, e2, j1, t)
        s2, x2 = local(e2, e1, j2, t)
        prof = 2.0 * (s1 * x2 + s2 * x1) / (x1 + x2) ** 2
        total += float(np.sum(prof * np.diff(u))) * 0.5
    return total / bounds.length
