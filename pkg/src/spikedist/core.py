"""Spike-train model, validation and the piecewise-linear distance profile.

Spike times are in milliseconds throughout. A spike train is represented as a
read-only, strictly increasing ``float64`` numpy array; :func:`validate_train`
is the single place where that invariant is established.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Breakpoints closer than this (ms) are merged.
BREAKPOINT_TOL = 1e-12

SpikeTrain = np.ndarray


class SpikeTrainError(ValueError):
    """Base class for invalid spike trains."""


class EmptyTrain(SpikeTrainError):
    pass


class NotSorted(SpikeTrainError):
    pass


class Duplicate(NotSorted):
    pass


class OutOfBounds(SpikeTrainError):
    pass


class NonFinite(SpikeTrainError):
    pass


@dataclass(frozen=True)
class Bounds:
    """Integration interval ``[a, b]`` in ms."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError(f"bounds must be finite, got [{a}, {b}]")
        if not a < b:
            raise ValueError(f"bounds need a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, train: np.ndarray) -> bool:
        return bool(train[0] >= self.a and train[-1] <= self.b)


def validate_train(times: Iterable[float], bounds: Bounds | None = None,
                   merge_duplicates: bool = False) -> SpikeTrain:
    """Check spike times and return them as a read-only array.

    Parameters
    ----------
    times : iterable of float
        Spike times in ms, in increasing order.
    bounds : Bounds, optional
        If given, every spike must lie in ``[bounds.a, bounds.b]``.
    merge_duplicates : bool
        Collapse repeated spike times instead of raising :class:`Duplicate`.
        The resulting distances are then only pseudo-metrics on the original
        (multi-)sets.

    Raises
    ------
    EmptyTrain, NotSorted, Duplicate, OutOfBounds, NonFinite
    """
    arr = np.array(list(times) if not isinstance(times, np.ndarray) else times,
                   dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyTrain("spike train is empty")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("spike train contains non-finite times")
    steps = np.diff(arr)
    if np.any(steps < 0):
        i = int(np.argmax(steps < 0)) + 1
        raise NotSorted(
            f"spike {i} ({float(arr[i])!r}) precedes spike {i - 1} ({float(arr[i - 1])!r})")
    if np.any(steps == 0):
        if not merge_duplicates:
            i = int(np.argmax(steps == 0)) + 1
            raise Duplicate(f"duplicate spike time {float(arr[i])!r} at index {i}")
        arr = np.unique(arr)
    if bounds is not None and not bounds.contains(arr):
        raise OutOfBounds(
            f"spikes span [{float(arr[0])!r}, {float(arr[-1])!r}], outside [{bounds.a}, {bounds.b}]")
    arr.setflags(write=False)
    return arr


def infer_bounds(*trains: Sequence[float]) -> Bounds:
    """Bounds covering the extremes of the given trains."""
    lo = min(float(np.min(t)) for t in trains)
    hi = max(float(np.max(t)) for t in trains)
    return Bounds(lo, hi)


def point_distance(x, train: SpikeTrain):
    """Distance from time(s) ``x`` to the nearest spike of ``train``.

    Scalar in, float out; array in, array out.
    """
    train = np.asarray(train, dtype=np.float64)
    xs = np.asarray(x, dtype=np.float64)
    idx = np.searchsorted(train, xs)
    left = train[np.clip(idx - 1, 0, train.size - 1)]
    right = train[np.clip(idx, 0, train.size - 1)]
    out = np.minimum(np.abs(xs - left), np.abs(right - xs))
    if out.ndim == 0:
        return float(out)
    return out


def _dedup(points: np.ndarray) -> np.ndarray:
    points = np.sort(points)
    keep = np.empty(points.size, dtype=bool)
    keep[0] = True
    keep[1:] = np.diff(points) > BREAKPOINT_TOL
    return points[keep]


def breakpoints(t1: SpikeTrain, t2: SpikeTrain, bounds: Bounds) -> np.ndarray:
    """Points where the profile ``|d(s, t1) - d(s, t2)|`` may change slope.

    These are the spikes of both trains, the midpoints between neighbouring
    spikes of the same train, the midpoints between merged-order neighbours
    that belong to different trains, and the two bounds.
    """
    t1 = np.asarray(t1, dtype=np.float64)
    t2 = np.asarray(t2, dtype=np.float64)
    merged = np.concatenate([t1, t2])
    owner = np.concatenate([np.zeros(t1.size, np.int8), np.ones(t2.size, np.int8)])
    order = np.argsort(merged, kind="stable")
    merged, owner = merged[order], owner[order]
    cross = owner[1:] != owner[:-1]
    cross_mid = 0.5 * (merged[1:][cross] + merged[:-1][cross])
    pts = np.concatenate([
        [bounds.a, bounds.b], t1, t2,
        0.5 * (t1[1:] + t1[:-1]), 0.5 * (t2[1:] + t2[:-1]), cross_mid,
    ])
    pts = _dedup(pts)
    pts[0], pts[-1] = bounds.a, bounds.b
    return pts


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear ``phi(s) = |d(s, T) - d(s, T')|`` on ``[a, b]``.

    ``s`` holds every breakpoint (including collinear ones), ``phi`` the exact
    values there; the function is linear in between.
    """

    s: np.ndarray
    phi: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.s, self.phi)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.s.tolist(), self.phi.tolist()))


def phi(x, t1: SpikeTrain, t2: SpikeTrain):
    """Direct evaluation of ``|d(x, t1) - d(x, t2)|``."""
    return np.abs(point_distance(x, t1) - point_distance(x, t2))


def profile(t1: SpikeTrain, t2: SpikeTrain, bounds: Bounds) -> Profile:
    s = breakpoints(t1, t2, bounds)
    return Profile(s, np.asarray(phi(s, t1, t2), dtype=np.float64))


def integrate_profile(p: Profile) -> float:
    """Exact integral of a piecewise-linear profile (trapezoid rule)."""
    widths = np.diff(p.s)
    return math.fsum((widths * (p.phi[1:] + p.phi[:-1]) * 0.5).tolist())
