"""Spike-train distances based on nearest-spike time profiles."""
from .baselines import (kreuz_isi, kreuz_spike, schreiber_distance, spike_count_distance,
                        van_rossum_discrete, van_rossum_exact, victor_purpura)
from .core import (Bounds, Duplicate, EmptyTrain, NonFinite, NotSorted, OutOfBounds, Profile,
                   SpikeTrainError, breakpoints, infer_bounds, integrate_profile, phi,
                   point_distance, profile, validate_train)
from .kernels import DomainError, KernelH, KernelK, KernelL, ParamError, ZeroAtOriginWarning
from .metrics import (GridError, GridSpec, convolution_max_metric, hausdorff,
                      localized_max_metric, localized_modulus_metric, localized_van_rossum,
                      max_metric, modulus_metric, modulus_metric_alg1, modulus_metric_alg2)
from .registry import METRIC_NAMES, MetricParams, build

__version__ = "0.1.0"
