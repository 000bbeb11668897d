"""Closed-form kernels.

Three families are used by the metrics:

* ``KernelH`` weights the profile around each integration point (max-metrics),
* ``KernelK`` filters a spike train before comparison (convolution max-metric),
* ``KernelL`` localizes a metric towards the end ``b`` of the interval.

All are frozen dataclasses; calling one evaluates it (vectorized over numpy
arrays). ``H`` and ``L`` kernels are defined on ``[0, b - a]`` and ``K`` on the
whole real line.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import optimize

#: Relative gap below which time constants count as equal.
SINGULAR_TOL = 1e-9


class ParamError(ValueError):
    pass


class DomainError(ValueError):
    pass


class ZeroAtOriginWarning(UserWarning):
    """The kernel vanishes at 0; the localized metrics then only become
    pseudo-metrics for differences located exactly at ``b``."""


def _check_tau(name, value):
    if value is None or not math.isfinite(value) or value <= 0:
        raise ParamError(f"{name} must be a positive finite number, got {value!r}")


def _distinct(x, y):
    return abs(x - y) >= SINGULAR_TOL * max(abs(x), abs(y))


def _as_offsets(x, span, allow_negative=False):
    xs = np.asarray(x, dtype=np.float64)
    if not allow_negative and np.any(xs < 0):
        raise DomainError("kernel evaluated at a negative offset")
    if span is not None and np.any(xs > span * (1 + 1e-12)):
        raise DomainError(f"kernel evaluated beyond its span {span}")
    return xs


def _ret(out):
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class KernelH:
    """Max-metric weighting kernel: ``exp``, ``gauss`` or ``const``."""

    kind: str = "exp"
    tau: float = 10.0
    value: Optional[float] = None
    span: Optional[float] = None

    def __post_init__(self):
        if self.kind in ("exp", "gauss"):
            _check_tau("tau", self.tau)
        elif self.kind == "const":
            if self.value is None or not self.value > 0 or not math.isfinite(self.value):
                raise ParamError("constant kernel needs a positive value")
        elif self.kind == "alpha":
            raise ParamError("alpha kernel vanishes at 0 and cannot weight a max-metric")
        else:
            raise ParamError(f"unknown H kernel kind {self.kind!r}")

    @classmethod
    def constant(cls, bounds) -> "KernelH":
        """``1 / (b - a)``: turns the max-metric into the Hausdorff distance."""
        return cls("const", value=1.0 / bounds.length, span=bounds.length)

    def __call__(self, x):
        xs = _as_offsets(x, self.span)
        if self.kind == "exp":
            out = np.exp(-xs / self.tau) / self.tau
        elif self.kind == "gauss":
            out = np.exp(-xs * xs / (2 * self.tau ** 2)) / (self.tau * math.sqrt(2 * math.pi))
        else:
            out = np.full_like(xs, self.value)
        return _ret(out)

    @property
    def bound(self) -> float:
        if self.kind == "exp":
            return 1.0 / self.tau
        if self.kind == "gauss":
            return 1.0 / (self.tau * math.sqrt(2 * math.pi))
        return float(self.value)


@dataclass(frozen=True)
class KernelK:
    """Symmetric filtering kernel ``exp(-|x| / tau)``; peak value ``p = 1``."""

    kind: str = "exp"
    tau: float = 10.0

    def __post_init__(self):
        if self.kind != "exp":
            raise ParamError(f"unknown K kernel kind {self.kind!r}")
        _check_tau("tau", self.tau)

    def __call__(self, x):
        xs = np.asarray(x, dtype=np.float64)
        return _ret(np.exp(-np.abs(xs) / self.tau))

    @property
    def bound(self) -> float:
        return 1.0


@dataclass(frozen=True)
class KernelL:
    """Localization kernel.

    ``exp``    ``exp(-x/tau) / tau``
    ``alpha``  ``x/tau**2 * exp(-x/tau)``
    ``dexp``   difference of exponentials with rise ``tau_s``
    ``iaf``    integrate-and-fire PSP for a double-exponential current
               (``tau`` membrane, ``tau_s`` decay, ``tau_r`` rise)
    ``const``  ``value`` everywhere
    """

    kind: str = "exp"
    tau: float = 20.0
    tau_s: Optional[float] = None
    tau_r: Optional[float] = None
    value: float = 1.0
    span: Optional[float] = None

    def __post_init__(self):
        k = self.kind
        if k == "const":
            if not (self.value > 0 and math.isfinite(self.value)):
                raise ParamError("constant kernel needs a positive value")
            return
        if k not in ("exp", "alpha", "dexp", "iaf"):
            raise ParamError(f"unknown L kernel kind {k!r}")
        _check_tau("tau", self.tau)
        if k in ("dexp", "iaf"):
            _check_tau("tau_s", self.tau_s)
            if not _distinct(self.tau, self.tau_s):
                raise ParamError("tau and tau_s must differ")
        if k == "iaf":
            _check_tau("tau_r", self.tau_r)
            if not (_distinct(self.tau, self.tau_r) and _distinct(self.tau_s, self.tau_r)):
                raise ParamError("tau, tau_s and tau_r must be pairwise distinct")
        if k in ("alpha", "dexp", "iaf"):
            warnings.warn(f"L kernel {k!r} is 0 at the origin", ZeroAtOriginWarning,
                          stacklevel=3)

    def _terms(self):
        """``(coefficient, time constant)`` pairs of the exponential expansion."""
        t, ts, tr = self.tau, self.tau_s, self.tau_r
        if self.kind == "exp":
            return [(1.0 / t, t)]
        if self.kind == "dexp":
            c = t / (t - ts)
            return [(c, t), (-c, ts)]
        if self.kind == "iaf":
            pre = t / (ts - tr)
            cs = pre * ts / (t - ts)
            cr = pre * tr / (t - tr)
            return [(cs - cr, t), (-cs, ts), (cr, tr)]
        raise AssertionError(self.kind)

    def __call__(self, x):
        xs = _as_offsets(x, self.span)
        if self.kind == "const":
            return _ret(np.full_like(xs, self.value))
        if self.kind == "alpha":
            return _ret(xs / self.tau ** 2 * np.exp(-xs / self.tau))
        out = sum(c * np.exp(-xs / tk) for c, tk in self._terms())
        # cancellation near 0 can leave tiny negative values
        return _ret(np.maximum(out, 0.0))

    @property
    def bound(self) -> float:
        if self.kind == "const":
            return float(self.value)
        if self.kind == "exp":
            return 1.0 / self.tau
        if self.kind == "alpha":
            return math.exp(-1.0) / self.tau
        if self.kind == "dexp":
            t, ts = self.tau, self.tau_s
            return float(self(t * ts * math.log(t / ts) / (t - ts)))
        terms = self._terms()

        def slope(x):
            return sum(-c / tk * math.exp(-x / tk) for c, tk in terms)

        taus = (self.tau, self.tau_s, self.tau_r)
        lo, hi = 1e-6 * min(taus), 50.0 * max(taus)
        x_peak = optimize.brentq(slope, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        return float(self(x_peak))


Kernel = Union[KernelH, KernelK, KernelL]


def eval_kernel(k: Kernel, x):
    return k(x)


def kernel_bound(k: Kernel) -> float:
    """Upper bound ``m`` of the kernel on its domain (its supremum)."""
    return k.bound
