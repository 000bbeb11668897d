"""Hausdorff-type spike-train distances.

Every function takes two spike trains (validated arrays, see
:func:`spikedist.core.validate_train`) and optional :class:`Bounds`. When
bounds are omitted they default to the extremes of the two trains.

The modulus-metric is computed exactly. The max-metrics and localized metrics
need a numerical outer integral; they use a :class:`GridSpec` and evaluate the
profile exactly at every grid point and every profile breakpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Bounds, Profile, breakpoints, infer_bounds, integrate_profile, phi, profile
from .kernels import KernelH, KernelK, KernelL, ParamError

# rows * columns per chunk in the brute-force suprema
_CHUNK = 1 << 22


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform integration grid with optional refinement at breakpoints."""

    step: float = 1.0
    refine_with_breakpoints: bool = True

    def points(self, bounds: Bounds, extra=None) -> np.ndarray:
        if not (self.step > 0 and math.isfinite(self.step)):
            raise GridError(f"grid step must be positive, got {self.step!r}")
        if self.step > bounds.length:
            raise GridError(f"grid step {self.step} exceeds interval length {bounds.length}")
        n = int(math.floor(bounds.length / self.step + 1e-9))
        pts = bounds.a + self.step * np.arange(n + 1)
        if bounds.b - pts[-1] > 1e-9 * self.step:
            pts = np.append(pts, bounds.b)
        pts[-1] = min(pts[-1], bounds.b)
        if self.refine_with_breakpoints and extra is not None:
            pts = np.unique(np.concatenate([pts, np.asarray(extra, dtype=np.float64)]))
        return pts


DEFAULT_GRID = GridSpec()


def _bounds(t1, t2, bounds):
    return infer_bounds(t1, t2) if bounds is None else bounds


def _same(t1, t2) -> bool:
    return np.array_equal(np.asarray(t1, dtype=np.float64), np.asarray(t2, dtype=np.float64))


def _trapz(x, y) -> float:
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1])) * 0.5)


def _weighted_sup(s, x, values, weight) -> np.ndarray:
    """``max_j values[j] * weight(|s_i - x_j|)`` for every ``s_i``."""
    out = np.empty(s.size)
    rows = max(1, _CHUNK // max(1, x.size))
    for lo in range(0, s.size, rows):
        block = s[lo:lo + rows, None]
        out[lo:lo + rows] = np.max(values[None, :] * weight(np.abs(block - x[None, :])), axis=1)
    return out


def hausdorff(t1, t2, bounds: Bounds | None = None) -> float:
    """Pompeiu-Hausdorff distance, the largest value of the profile."""
    p = profile(t1, t2, _bounds(t1, t2, bounds))
    return float(np.max(p.phi))


def modulus_metric_alg1(t1, t2, bounds: Bounds | None = None) -> float:
    """Modulus-metric over a superset of the breakpoints.

    The point set holds the spikes, the same-train midpoints and the midpoints
    of *all* neighbours in the merged train; the distances to both trains are
    recovered by a forward scan and the profile is integrated by trapezoids.
    """
    if _same(t1, t2):
        return 0.0   # midpoint rounding would leave ~1e-17
    bounds = _bounds(t1, t2, bounds)
    a, b = bounds.a, bounds.b
    T1 = np.asarray(t1, dtype=np.float64)
    T2 = np.asarray(t2, dtype=np.float64)
    merged = np.sort(np.concatenate([T1, T2]))
    mids = np.concatenate([
        0.5 * (T1[1:] + T1[:-1]), 0.5 * (T2[1:] + T2[:-1]), 0.5 * (merged[1:] + merged[:-1]),
    ])
    P = np.sort(np.concatenate([merged, mids, [a, b]])).tolist()
    T1, T2 = T1.tolist(), T2.tolist()
    n1, n2 = len(T1), len(T2)

    d_o = 0.0
    i1 = i2 = 0
    s_p = a
    phi_p = abs(T1[0] - T2[0])
    for s in P[1:]:
        while s >= T1[i1] and i1 < n1 - 1:
            i1 += 1
        while s >= T2[i2] and i2 < n2 - 1:
            i2 += 1
        d1 = s - T1[i1 - 1] if i1 > 0 else b - a
        d1 = min(d1, abs(T1[i1] - s))
        d2 = s - T2[i2 - 1] if i2 > 0 else b - a
        d2 = min(d2, abs(T2[i2] - s))
        phi_s = abs(d1 - d2)
        d_o += (s - s_p) * (phi_s + phi_p) / 2
        s_p, phi_p = s, phi_s
    return d_o


def modulus_metric_alg2(t1, t2, bounds: Bounds | None = None) -> float:
    """Modulus-metric from a single merge pass over the spikes.

    The pass emits exactly the breakpoints together with their profile values,
    so no distance search is needed afterwards; the points are then sorted and
    integrated.
    """
    if _same(t1, t2):
        return 0.0   # midpoint rounding would leave ~1e-17
    bounds = _bounds(t1, t2, bounds)
    T = (np.asarray(t1, dtype=np.float64).tolist(), np.asarray(t2, dtype=np.float64).tolist())
    n = (len(T[0]), len(T[1]))
    cur = [0, 0]      # index of the spike being processed, per train
    last = [0, 0]     # index of the previously processed spike, per train
    prev = -1         # train of the previously processed spike, -1 before any
    P = [(bounds.a, abs(T[0][0] - T[1][0]))]

    def dist(t, k, i):
        # distance from t to train k, walking back from spike i
        Tk = T[k]
        d = abs(Tk[i] - t)
        j = i - 1
        while j >= 0 and abs(Tk[j] - t) <= d:
            d = abs(Tk[j] - t)
            j -= 1
        return d

    def proc1(j, k):
        nonlocal prev
        Tj, Tk, ij = T[j], T[k], cur[j]
        if ij > 0:
            t = (Tj[ij] + Tj[ij - 1]) / 2
            P.append((t, abs((Tj[ij] - Tj[ij - 1]) / 2 - dist(t, k, cur[k]))))
        if prev == k:
            P.append(((Tj[ij] + Tk[last[k]]) / 2, 0.0))
        t = Tj[ij]
        P.append((t, min(abs(t - Tk[last[k]]), Tk[cur[k]] - t)))
        last[j] = ij
        cur[j] = ij + 1
        prev = j

    def proc2(j, k):
        # train k is exhausted; last[k] is its final spike
        nonlocal prev
        Tj, Tk, ij = T[j], T[k], cur[j]
        if ij > 0:
            t = (Tj[ij] + Tj[ij - 1]) / 2
            P.append((t, abs((Tj[ij] - Tj[ij - 1]) / 2 - dist(t, k, last[k]))))
        if prev == k:
            P.append(((Tj[ij] + Tk[last[k]]) / 2, 0.0))
        t = Tj[ij]
        P.append((t, t - Tk[last[k]]))
        cur[j] = ij + 1
        prev = j

    while cur[0] < n[0] and cur[1] < n[1]:
        if T[0][cur[0]] <= T[1][cur[1]]:
            proc1(0, 1)
        else:
            proc1(1, 0)
    while cur[0] < n[0]:
        proc2(0, 1)
    while cur[1] < n[1]:
        proc2(1, 0)
    P.append((bounds.b, abs(T[0][-1] - T[1][-1])))
    P.sort()

    d_o = 0.0
    for (s0, f0), (s1, f1) in zip(P, P[1:]):
        d_o += (s1 - s0) * (f1 + f0) / 2
    return d_o


modulus_metric = modulus_metric_alg2


def max_metric(t1, t2, bounds: Bounds | None = None, H: KernelH | None = None,
               grid: GridSpec = DEFAULT_GRID) -> float:
    """Max-metric: integral over ``s`` of ``sup_x phi(x) H(|s - x|)``.

    The supremum runs over the grid together with all profile breakpoints, so
    the profile's local maxima are always candidates. The result is an
    approximation from below of the continuous supremum.
    """
    bounds = _bounds(t1, t2, bounds)
    H = KernelH() if H is None else H
    bp = breakpoints(t1, t2, bounds)
    x = np.union1d(grid.points(bounds), bp)
    s = grid.points(bounds, extra=bp)
    sup = _weighted_sup(s, x, phi(x, t1, t2), H)
    return _trapz(s, sup)


def filtered(train, K: KernelK, x) -> np.ndarray:
    """``f(x) = sum_i K(x - t_i)``."""
    x = np.asarray(x, dtype=np.float64)
    train = np.asarray(train, dtype=np.float64)
    out = np.zeros(x.size)
    rows = max(1, _CHUNK // max(1, train.size))
    for lo in range(0, x.size, rows):
        out[lo:lo + rows] = K(x[lo:lo + rows, None] - train[None, :]).sum(axis=1)
    return out


def convolution_max_metric(t1, t2, bounds: Bounds | None = None, K: KernelK | None = None,
                           H: KernelH | None = None, grid: GridSpec = DEFAULT_GRID) -> float:
    """Max-metric of the filtered trains ``|f - f'|``, on the grid.

    With refinement enabled the spike times join the grid, since ``|f - f'|``
    peaks at spikes for monotone ``K``.
    """
    bounds = _bounds(t1, t2, bounds)
    K = KernelK() if K is None else K
    H = KernelH() if H is None else H
    spikes = np.concatenate([np.asarray(t1, float), np.asarray(t2, float)])
    x = grid.points(bounds, extra=spikes)
    diff = np.abs(filtered(t1, K, x) - filtered(t2, K, x))
    sup = _weighted_sup(x, x, diff, H)
    return _trapz(x, sup)


def suffix_max_profile(p: Profile) -> Profile:
    """Exact ``S(s) = sup_{x in [s, b]} phi(x)`` as a piecewise-linear profile.

    On a segment where the profile falls below the running maximum from the
    right, ``S`` follows the profile down to the crossing point and is flat
    afterwards; the crossing point becomes a new breakpoint.
    """
    s, f = p.s, p.phi
    run = np.maximum.accumulate(f[::-1])[::-1]
    out_s = [s[-1]]
    out_v = [run[-1]]
    for i in range(s.size - 2, -1, -1):
        m = run[i + 1]
        if f[i] > m and f[i + 1] < m:
            cross = s[i] + (f[i] - m) / (f[i] - f[i + 1]) * (s[i + 1] - s[i])
            out_s.append(cross)
            out_v.append(m)
        out_s.append(s[i])
        out_v.append(run[i])
    return Profile(np.array(out_s[::-1]), np.array(out_v[::-1]))


def localized_max_metric(t1, t2, bounds: Bounds | None = None, L: KernelL | None = None,
                         grid: GridSpec = DEFAULT_GRID) -> float:
    """Integral of ``L(b - s) * sup_{x in [s, b]} phi(x)``."""
    bounds = _bounds(t1, t2, bounds)
    L = KernelL() if L is None else L
    S = suffix_max_profile(profile(t1, t2, bounds))
    s = grid.points(bounds, extra=S.s)
    return _trapz(s, L(np.maximum(bounds.b - s, 0.0)) * S(s))


def localized_modulus_metric(t1, t2, bounds: Bounds | None = None, L: KernelL | None = None,
                             grid: GridSpec = DEFAULT_GRID) -> float:
    """Integral of ``phi(s) * L(b - s)``."""
    bounds = _bounds(t1, t2, bounds)
    L = KernelL() if L is None else L
    s = grid.points(bounds, extra=breakpoints(t1, t2, bounds))
    return _trapz(s, phi(s, t1, t2) * L(np.maximum(bounds.b - s, 0.0)))


def causal_trace(train, tau: float, s):
    """Left and right limits of ``g(s) = sum_{t <= s} exp(-(s - t) / tau)``.

    ``s`` must be sorted and contain every spike at or after ``s[0]``; spikes
    before ``s[0]`` are decayed in from the start.
    """
    train = np.asarray(train, dtype=np.float64).tolist()
    s = np.asarray(s, dtype=np.float64)
    left = np.empty(s.size)
    right = np.empty(s.size)
    g, j, n = 0.0, 0, len(train)
    start = float(s[0])
    while j < n and train[j] < start:
        g += math.exp(-(start - train[j]) / tau)
        j += 1
    last = start
    exp = math.exp
    for k, sk in enumerate(s.tolist()):
        g *= exp(-(sk - last) / tau)
        last = sk
        left[k] = g
        while j < n and train[j] <= sk:
            g += exp(-(sk - train[j]) / tau)
            j += 1
        right[k] = g
    return left, right


def squared_trace_integral(t1, t2, tau: float, s, weight=None) -> float:
    """Trapezoid integral of ``(g - g')^2 * weight`` honouring the jumps at spikes."""
    l1, r1 = causal_trace(t1, tau, s)
    l2, r2 = causal_trace(t2, tau, s)
    fl = (l1 - l2) ** 2
    fr = (r1 - r2) ** 2
    if weight is not None:
        fl = fl * weight
        fr = fr * weight
    return float(np.sum(np.diff(s) * (fr[:-1] + fl[1:])) * 0.5)


def localized_van_rossum(t1, t2, bounds: Bounds | None = None, tau: float = 10.0,
                         L: KernelL | None = None, grid: GridSpec = DEFAULT_GRID) -> float:
    """van Rossum distance weighted by ``L(b - s)`` and cut at ``b``.

    The integral starts at ``a``: both causal traces are zero before the first
    spike.
    """
    if not (tau > 0 and math.isfinite(tau)):
        raise ParamError(f"tau must be positive, got {tau!r}")
    bounds = _bounds(t1, t2, bounds)
    L = KernelL() if L is None else L
    spikes = np.concatenate([np.asarray(t1, float), np.asarray(t2, float)])
    s = np.union1d(grid.points(bounds), spikes)
    return squared_trace_integral(t1, t2, tau, s, L(np.maximum(bounds.b - s, 0.0)))


__all__ = [
    "GridError", "GridSpec", "DEFAULT_GRID", "hausdorff", "modulus_metric",
    "modulus_metric_alg1", "modulus_metric_alg2", "max_metric", "filtered",
    "convolution_max_metric", "suffix_max_profile", "localized_max_metric",
    "localized_modulus_metric", "causal_trace", "squared_trace_integral",
    "localized_van_rossum", "integrate_profile",
]
