"""Covert multi-AUV hunting: channel model, simulation and diffusion policies."""

import json

from ._core import *  # noqa: F401,F403
from ._core import Error, IntegrityError, ValidationError
from . import _core


def default_config():
    """Default run configuration as a dict."""
    return json.loads(_core.default_config())


def config_hash(config):
    return _core.config_hash(json.dumps(config))


def simulate(config, policy="pursuit", episodes=1):
    """Scripted-policy episodes; returns the metrics report as a dict."""
    text = json.dumps(config) if config is not None else ""
    return json.loads(_core.simulate(text, policy, episodes))


def run_cli(*args):
    """Runs the CLI in-process and returns (exit code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])


__all__ = [
    "Error",
    "IntegrityError",
    "ValidationError",
    "config_hash",
    "default_config",
    "run_cli",
    "simulate",
]
