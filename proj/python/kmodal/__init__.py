"""K-modal density fitting by dynamic programming."""

import json as _json

from ._kmodal import (
    FitResult,
    KModalDensity,
    KModalError,
    fit,
    grenander,
    pava,
    sample_mixture,
    true_mode_count,
)
from . import _kmodal

__all__ = [
    "FitResult",
    "KModalDensity",
    "KModalError",
    "fit",
    "grenander",
    "pava",
    "run_benchmark",
    "sample_mixture",
    "select_k",
    "true_mode_count",
]


def select_k(data, **kwargs):
    """Choose K from data. Returns the selection report as a dict."""
    return _json.loads(_kmodal.select_k(data, **kwargs))


def run_benchmark(**kwargs):
    """Random-mixture selection benchmark. Returns the report as a dict."""
    return _json.loads(_kmodal.run_benchmark(**kwargs))
