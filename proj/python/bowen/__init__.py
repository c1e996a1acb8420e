"""Entropy, foliation and growth experiments on toral and suspension models.

Configs and results cross into the C++ core as JSON, so every helper here
takes and returns plain dicts.
"""

import json as _json

from . import _core
from ._core import (
    AdmissibilityError,
    BudgetError,
    ChartError,
    ConvergenceError,
    InputError,
    System,
    dn_distance,
    grid_cloud,
    random_cloud,
    sha256_hex,
)

__version__ = _core.__version__


def system(config):
    """Build a system from its config block, e.g. {"kind": "toral", "matrix": [[2, 1], [1, 1]]}."""
    return System.from_config(_json.dumps(config))


def entropy_estimate(sys, points, n, delta, order_seed=1, spanning=False, workers=1):
    return _json.loads(_core.entropy_estimate(sys, points, list(n), list(delta), order_seed, spanning, workers))


def unstable_rate_estimate(sys, x, delta, N):
    return _json.loads(_core.unstable_rate_estimate(sys, list(x), delta, list(N)))


def canonical_config(config):
    return _json.loads(_core.canonical_config(_json.dumps(config)))


def config_id(config):
    return _core.config_id(_json.dumps(canonical_config(config)))


def run_experiment(config, workers=1, seed=None):
    return _json.loads(_core.run_experiment(_json.dumps(config), workers, seed))


def write_record(record, out):
    return _core.write_record(_json.dumps(record), str(out))


def verify_record(record):
    return _json.loads(_core.verify_record(_json.dumps(record)))
