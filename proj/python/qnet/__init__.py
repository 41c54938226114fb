"""Simulation of state-dependent queueing networks and their diffusion limits."""

import json as _json

from ._qnet import (  # noqa: F401
    QnetError,
    ValidationError,
    __version__,
    covariance,
    ks_critical_value,
    ks_two_sample,
    reflection_matrix,
    sample_limit,
    solve_sp,
    solve_sp_1d,
    spectral_radius,
)
from . import _qnet


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def validate_config(config):
    """Violations of a config (dict or JSON text) as (condition, message) pairs."""
    return _qnet.validate_config(_text(config))


def simulate(config, n, replication=0):
    return _qnet.simulate(_text(config), float(n), replication)


def run_sweep(config):
    """Run the scaling sweep; returns (rows, manifest dict)."""
    rows, manifest = _qnet.run_sweep(_text(config))
    return rows, _json.loads(manifest)


def limit_samples(config, replications):
    return sample_limit(_text(config), replications)
