"""Optimal quadratic quantizers, distortion Hessians, Wasserstein distances and rate bounds."""

import csv
import io
import json

from ._core import (
    DomainError,
    InvalidQuantizer,
    Measure,
    NotApplicable,
    ParseError,
    SizeLimitError,
    UnsupportedOperation,
    distortion,
    evaluate_bound,
    fit_rate,
    gradient,
    hessian_1d,
    hessian_2d,
    pd_certificate,
    solve,
    w2,
)
from ._core import run_experiment as _run_experiment

__version__ = "0.1.0"


def run_experiment(config):
    """Run an experiment grid. `config` is a dict or a JSON string.

    Returns (rows, timeouts) where rows is a list of dicts keyed by CSV column.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    csv_text, timeouts = _run_experiment(text)
    rows = list(csv.DictReader(io.StringIO(csv_text, newline="")))
    return rows, timeouts


__all__ = [
    "DomainError",
    "InvalidQuantizer",
    "Measure",
    "NotApplicable",
    "ParseError",
    "SizeLimitError",
    "UnsupportedOperation",
    "distortion",
    "evaluate_bound",
    "fit_rate",
    "gradient",
    "hessian_1d",
    "hessian_2d",
    "pd_certificate",
    "run_experiment",
    "solve",
    "w2",
]
