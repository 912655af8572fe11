"""Hyperspectral ocean-color inversion with VAE and mixture density networks.

Pipeline commands accept the same settings as the ``hypervae`` CLI, as
keyword arguments (``epochs=50``, ``output_dir="runs/a"``); values are
converted to text and resolved with the usual precedence: defaults, then
``config_file``, then ``HYPERVAE_*`` environment variables, then keywords.
"""

from __future__ import annotations

import json
import os
from typing import Any, Optional

from . import _hypervae
from ._hypervae import (
    HypervaeError,
    Model,
    evaluate_all,
    log_bias,
    male,
    rmse,
    rmsle,
    slope,
)

__version__ = _hypervae.__version__

__all__ = [
    "HypervaeError",
    "Model",
    "config",
    "evaluate",
    "evaluate_all",
    "gen_synthetic",
    "log_bias",
    "male",
    "predict",
    "preprocess",
    "rmse",
    "rmsle",
    "slope",
    "sweep",
    "train",
]


def _text(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, os.PathLike):
        return os.fspath(value)
    return str(value)


def _settings(kwargs: dict) -> dict:
    return {key: _text(value) for key, value in kwargs.items() if value is not None}


def _file(config_file) -> Optional[str]:
    return None if config_file is None else os.fspath(config_file)


def config(config_file=None, **settings) -> dict:
    """The fully resolved run configuration."""
    return json.loads(_hypervae.config_json(_settings(settings), _file(config_file)))


def preprocess(config_file=None, **settings) -> dict:
    """Quality control, grid resampling and the seeded train/test split."""
    return _hypervae.preprocess(_settings(settings), _file(config_file))


def train(config_file=None, **settings) -> dict:
    """Train the configured model; returns artifact paths and test metrics."""
    return _hypervae.train(_settings(settings), _file(config_file))


def predict(config_file=None, **settings) -> dict:
    """Write long-format predictions for a dataset."""
    return _hypervae.predict(_settings(settings), _file(config_file))


def evaluate(config_file=None, **settings) -> dict:
    """Overall and per-band metrics of a predictions file."""
    return json.loads(_hypervae.evaluate(_settings(settings), _file(config_file)))


def sweep(config_file=None, **settings) -> str:
    """Per-band metrics table (CSV text); also written to sweep.csv."""
    return _hypervae.sweep(_settings(settings), _file(config_file))


def gen_synthetic(config_file=None, **settings):
    """Write a synthetic raw dataset and return its path."""
    return _hypervae.gen_synthetic(_settings(settings), _file(config_file))
