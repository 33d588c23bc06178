"""Python access to the womops solvers.

Configs are plain dicts using the same schema as the CLI's JSON files.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    DomainError,
    InvalidParams,
    RegimeViolation,
    UnsupportedSignal,
    WomopsError,
    potential_market,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "InvalidParams",
    "RegimeViolation",
    "UnsupportedSignal",
    "WomopsError",
    "closed_form_t3",
    "potential_market",
    "simulate",
    "solve_m1",
    "solve_m2",
]


def _dump(config):
    return "" if config is None else json.dumps(config)


def solve_m1(lambda_p, config=None):
    """Myopic shipment policy for a known premium demand rate."""
    return json.loads(_core.solve_m1_json(float(lambda_p), _dump(config)))


def solve_m2(config=None, recovery=False):
    """Policy and fee under the demand equilibrium.

    With ``recovery=True`` the result also holds the long-run outcome of the
    myopic loop run at the optimal fee.
    """
    return json.loads(_core.solve_m2_json(_dump(config), recovery))


def simulate(config=None, seed=None, iters=10, tol=1e-4, stop_early=False):
    """Iterate the myopic feedback loop at the configured fee."""
    return json.loads(_core.simulate_json(_dump(config), seed, iters, tol, stop_early))


def closed_form_t3(config=None, fee=None):
    """Closed-form t3. Pass ``fee`` for a pinned fee, omit it for an interior fee."""
    return json.loads(_core.closed_form_t3_json(_dump(config), fee))
