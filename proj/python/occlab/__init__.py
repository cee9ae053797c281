"""Python access to the occlab simulators, estimators and experiments."""

import json as _json

from ._occlab import (
    OcclabError,
    __version__,
    evaluate,
    occupation_oracle,
    riemann_sum,
    sobolev_norm,
    trapezoid,
)
from . import _occlab


def _process(process):
    return process if isinstance(process, str) and process.lstrip().startswith(("{", '"')) \
        else _json.dumps(process)


def simulate(process, n, seed=0, replicate=0):
    """Return (times, values) for one path; `process` is a kind name or a dict."""
    return _occlab.simulate(_process(process), n, seed, replicate)


def theoretical_rate(process, s=0.0, context="l2", rho=0.0, sharp_indicator=False):
    return _occlab.theoretical_rate(_process(process), s, context, rho, sharp_indicator)


def fourier_bound(process, function_id, n, horizon=1.0):
    """C = 1 value of the Fourier-domain bound on the squared L2 error."""
    return _occlab.fourier_bound(_process(process), function_id, n, horizon)


def run_experiment(config):
    """Run a config (dict or JSON text) and return its summary as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_occlab.run_experiment(text))


__all__ = [
    "OcclabError",
    "evaluate",
    "fourier_bound",
    "occupation_oracle",
    "riemann_sum",
    "run_experiment",
    "simulate",
    "sobolev_norm",
    "theoretical_rate",
    "trapezoid",
]
