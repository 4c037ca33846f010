"""Python bindings for the parksia parking-auction simulator.

Configs are passed as JSON text or as plain dicts; see the README for keys.
"""

import json as _json

from . import _core
from ._core import ConfigError, InternalError, oracle_check, run_batch

__all__ = [
    "ConfigError",
    "InternalError",
    "matrix",
    "network_dump",
    "oracle_check",
    "population_csv",
    "resolve_config",
    "run",
    "run_batch",
]


def _text(config):
    if config is None:
        return "{}"
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def resolve_config(config=None):
    """Return the validated config with defaults filled in, as a dict."""
    return _json.loads(_core.resolve_config(_text(config)))


def run(config=None, out_dir=None):
    """Run one scenario and return its summary fields."""
    return _core.run(_text(config), str(out_dir or ""))


def matrix(config=None, jobs=1, out_dir=None):
    """Run the scenario matrix and return one dict per cell."""
    return _core.matrix(_text(config), jobs, str(out_dir or ""))


def population_csv(config=None):
    return _core.population_csv(_text(config))


def network_dump(config=None):
    return _core.network_dump(_text(config))
