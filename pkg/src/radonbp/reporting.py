"""Result primitives: stochastic values with error bars and JSON-safe dumps."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MCValue:
    """A numeric result together with its standard error and sample count.

    ``std_error`` is the sample standard deviation divided by sqrt(samples)
    for Monte Carlo results, or a refinement-based estimate for deterministic
    quadrature.
    """

    value: float
    std_error: float
    samples: int

    def distance_in_errors(self, other=0.0):
        """|value - other| measured in combined standard errors."""
        ref = other.value if isinstance(other, MCValue) else float(other)
        err = combined_error(self, other)
        gap = abs(self.value - ref)
        if err == 0.0:
            return math.inf if gap > 0 else 0.0
        return gap / err


def combined_error(*values):
    """Root-sum-square of the standard errors of MCValues (floats count as exact)."""
    total = 0.0
    for v in values:
        if isinstance(v, MCValue):
            total += v.std_error ** 2
    return math.sqrt(total)


def mc_mean(samples_array, scale=1.0):
    """MCValue for ``scale * mean(samples)`` with its standard error."""
    arr = np.asarray(samples_array, dtype=float)
    count = arr.size
    mean = float(arr.mean()) * scale
    if count > 1:
        err = float(arr.std(ddof=1)) * abs(scale) / math.sqrt(count)
    else:
        err = math.inf
    return MCValue(mean, err, count)


def compare_with_errors(left, right, sigmas=3.0):
    """Three-way verdict for ``left <= right``: 'true', 'false', or 'indeterminate'.

    A comparison whose margin sits inside ``sigmas`` combined standard errors
    is reported indeterminate rather than resolved by noise.
    """
    lv = left.value if isinstance(left, MCValue) else float(left)
    rv = right.value if isinstance(right, MCValue) else float(right)
    band = sigmas * combined_error(left, right)
    if abs(lv - rv) <= band:
        return "indeterminate"
    return "true" if lv < rv else "false"


def to_jsonable(obj):
    """Recursively convert dataclasses / numpy values into JSON-dumpable data."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    return obj
