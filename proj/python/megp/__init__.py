"""Multi-equation genetic programming for regression on multi-regime data."""

import json

from ._core import (
    InputError,
    Model,
    StructuralError,
    distance,
    evaluate,
    improvement_percent,
    parse,
    rolling_splits,
    run_cli,
    wilcoxon_rank_sum,
)
from ._core import fit as _fit

__all__ = [
    "InputError",
    "Model",
    "StructuralError",
    "distance",
    "evaluate",
    "fit",
    "improvement_percent",
    "parse",
    "rolling_splits",
    "run_cli",
    "train",
    "wilcoxon_rank_sum",
]


def _dump(config):
    if config is None:
        return ""
    if isinstance(config, str):
        return config
    return json.dumps(config)


def fit(X, y, config=None, runs=0, threads=1):
    """Standard GP. `config` is a dict of GP settings (population_size, seed, ...)."""
    return _fit(X, y, _dump(config), runs, threads)


def train(X, y, config=None, feature_names=None, threads=1):
    """Residual clustering. `config` may hold runs_per_cluster etc. and a nested "gp" dict."""
    return Model.train(X, y, _dump(config), list(feature_names or []), threads)
