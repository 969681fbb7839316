"""Pool-based batch multi-objective Bayesian optimization."""
import json as _json
import os as _os

from ._core import (
    DegenerateData,
    FitFailure,
    GenerationStarvation,
    GpModel,
    InvalidInput,
    MoboError,
    NumericalError,
    OracleError,
    ParetoFront,
    ParseError,
    UnsupportedDimension,
    fit_gp,
    hvi,
    hypervolume,
    non_dominated_indices,
    qpmhi,
)
from . import _core


def _load(config, base_dir):
    if isinstance(config, (str, _os.PathLike)):
        path = _os.fspath(config)
        with open(path) as f:
            return f.read(), base_dir or _os.path.dirname(_os.path.abspath(path))
    return _json.dumps(config), base_dir or _os.getcwd()


def run_campaign(config, base_dir=None):
    """Run a campaign from a config dict or JSON path; returns (metrics_csv, front dict)."""
    text, base = _load(config, base_dir)
    metrics, front = _core.run_campaign(text, base)
    return metrics, _json.loads(front)


def run_bench(spec, base_dir=None):
    """Run an acquisition ablation; returns the aggregate CSV text."""
    text, base = _load(spec, base_dir)
    return _core.run_bench(text, base)
