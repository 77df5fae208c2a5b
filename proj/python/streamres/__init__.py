"""Weighted stream sampling, windowed clustering and event export."""

import json

from ._core import (  # noqa: F401
    ClusterConfig,
    Event,
    Record,
    Reservoir,
    ReservoirPool,
    Rng,
    StreamresError,
    WindowClustering,
    allocate,
    cluster_window,
    derive_seed,
    detect_outliers,
    evaluate,
    export_graph,
    f_measure,
    log_key,
    metrics_from_counts,
    minkowski,
    read_records,
    required_size,
    run_stream,
    sample_size,
    uniform_without_replacement,
    weighted_sample_indices,
    weighted_with_replacement_indices,
)
from . import _core


def default_config():
    return json.loads(_core.default_config_json())


def run_pipeline(config=None):
    """Run every stage; `config` is a (partial) config dict. Returns the summary."""
    return json.loads(_core.run_pipeline_json(json.dumps(config or {})))


def generate_synthetic(count, **spec):
    """Synthetic records; keyword arguments override generator defaults."""
    return _core.generate_synthetic(json.dumps(spec), count)
