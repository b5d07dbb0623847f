"""Hierarchical clustering of mixture components by density-path bottlenecks."""

import json

import numpy as np

from . import _tneb
from ._tneb import (
    Error,
    FilterError,
    FitError,
    IngestionError,
    IoError,
    NumericalError,
    PipelineResult,
    ValidationError,
    ari,
    dip,
)

__version__ = _tneb.__version__

__all__ = [
    "Error", "FilterError", "FitError", "IngestionError", "IoError", "NumericalError", "PipelineResult",
    "ValidationError", "ari", "compare", "dip", "fit", "generate", "log_density", "run", "stability",
]


def _points(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _config(points, config):
    # Same automatic component count as the command line tool.
    if config.get("n_components") is None:
        config = {**config, "n_components": 15 if points.shape[1] == 2 else 25}
    return json.dumps(config)


def generate(kind, **params):
    """Returns (points, labels, group_labels or None) for a built-in dataset kind."""
    points, labels, groups = _tneb.generate(json.dumps({"kind": kind, **params}))
    return points, np.asarray(labels), None if groups is None else np.asarray(groups)


def fit(points, **config):
    """Fits a mixture; returns the model as a dict."""
    return json.loads(_tneb.fit(_points(points), _config(_points(points), config)))


def log_density(model, points):
    return _tneb.log_density(json.dumps(model), _points(points))


def run(points, **config):
    """Full pipeline: fit, filter, path graph, dendrogram. Cut the result with .cut(k)."""
    return _tneb.run(_points(points), _config(_points(points), config))


def compare(points, labels, seeds=(0,), k=None, **config):
    """Scores every merging strategy; returns the long-format CSV text."""
    return _tneb.compare(_points(points), list(map(int, labels)), _config(_points(points), config), list(seeds), k)


def stability(points, k, seeds=(0,), component_counts=(), **config):
    """Seed stability, or the component-count sweep when component_counts is given."""
    return json.loads(_tneb.stability(_points(points), _config(_points(points), config), list(seeds), list(component_counts), k))
