"""Named distances with the default parameters of the simulation studies.

Each entry maps a short name (as used on the command line) to a callable
``f(t1, t2, bounds)``. ``set_based`` marks distances that only see the set of
spike times; when a train contains a repeated spike they receive the merged
train, while count-sensitive baselines see every copy.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

from . import baselines as bl
from . import metrics as mt
from .kernels import KernelH, KernelK, KernelL, ZeroAtOriginWarning


@dataclass(frozen=True)
class MetricParams:
    tau: float = 10.0          # van Rossum / convolution kernel K
    tau_h: float = 10.0
    tau_l: float = 20.0
    kernel_h: str = "exp"
    kernel_l: str = "exp"
    tau_s: Optional[float] = None
    tau_r: Optional[float] = None
    q: float = 0.2
    sigma: float = 10.0
    step: float = 1.0

    def H(self, bounds=None) -> KernelH:
        if self.kernel_h == "const":
            return KernelH.constant(bounds)
        return KernelH(self.kernel_h, self.tau_h)

    def L(self) -> KernelL:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ZeroAtOriginWarning)
            if self.kernel_l == "const":
                return KernelL("const", value=1.0)
            return KernelL(self.kernel_l, self.tau_l, self.tau_s, self.tau_r)

    def grid(self) -> mt.GridSpec:
        return mt.GridSpec(self.step)


@dataclass(frozen=True)
class Metric:
    name: str
    label: str
    fn: Callable
    set_based: bool = True

    def __call__(self, t1, t2, bounds):
        return float(self.fn(t1, t2, bounds))


def build(name: str, params: MetricParams = MetricParams()) -> Metric:
    p = params
    g = p.grid()
    K = KernelK("exp", p.tau)
    table = {
        "ph": ("h", lambda a, b, B: mt.hausdorff(a, b, B), True),
        "max": ("d_m", lambda a, b, B: mt.max_metric(a, b, B, p.H(B), g), True),
        "modulus": ("d_o", lambda a, b, B: mt.modulus_metric_alg2(a, b, B), True),
        "modulus-alg1": ("d_o A1", lambda a, b, B: mt.modulus_metric_alg1(a, b, B), True),
        "convmax": ("d_c", lambda a, b, B: mt.convolution_max_metric(a, b, B, K, p.H(B), g), False),
        "locmax": ("d_l", lambda a, b, B: mt.localized_max_metric(a, b, B, p.L(), g), True),
        "locmodulus": ("d_n", lambda a, b, B: mt.localized_modulus_metric(a, b, B, p.L(), g), True),
        "locvr": ("d_Rl", lambda a, b, B: mt.localized_van_rossum(a, b, B, p.tau, p.L(), g), False),
        "count": ("c", lambda a, b, B: bl.spike_count_distance(a, b), False),
        "vr": ("d_R", lambda a, b, B: bl.van_rossum_exact(a, b, p.tau), False),
        "vr-discrete": ("d_R A2", lambda a, b, B: bl.van_rossum_discrete(a, b, p.tau, B, g), False),
        "vp": (f"d_VP q={p.q:g}", lambda a, b, B: bl.victor_purpura(a, b, p.q), False),
        "schreiber": ("s", lambda a, b, B: bl.schreiber_distance(a, b, p.sigma, B, g), False),
        "kreuz-isi": ("k_i", lambda a, b, B: bl.kreuz_isi(a, b, B), True),
        "kreuz-spike": ("k_s", lambda a, b, B: bl.kreuz_spike(a, b, B), True),
    }
    if name.startswith("vp-"):
        q = float(name[3:])
        return Metric(name, f"d_VP q={q:g}", lambda a, b, B: bl.victor_purpura(a, b, q), False)
    if name not in table:
        raise KeyError(f"unknown metric {name!r}")
    label, fn, set_based = table[name]
    return Metric(name, label, fn, set_based)


METRIC_NAMES = ("ph", "max", "modulus", "convmax", "locmax", "locmodulus", "locvr", "count",
                "vr", "vr-discrete", "vp", "schreiber", "kreuz-isi", "kreuz-spike")


def build_all(names, params: MetricParams = MetricParams()) -> list[Metric]:
    return [build(n, params) for n in names]
