"""Weighted comparison geometry checks on Finsler and Lorentz-Finsler spaces."""

import json
import os

from . import _core
from ._core import (
    DomainError,
    HypothesisError,
    NumericalError,
    ScenarioError,
    comparison_s,
    epsilon_range_constant,
    known_checks,
    lagrangian,
    legendre,
    legendre_inverse,
)

__all__ = [
    "DomainError",
    "HypothesisError",
    "NumericalError",
    "ScenarioError",
    "comparison_s",
    "epsilon_range_constant",
    "known_checks",
    "lagrangian",
    "legendre",
    "legendre_inverse",
    "run_scenario",
    "zoo",
]


def run_scenario(scenario, out_dir="", tol=None, seed=None):
    """Run a scenario given as a dict or a path. Returns (exit_code, report dict)."""
    if isinstance(scenario, (str, os.PathLike)):
        code, text = _core.run_scenario_file(os.fspath(scenario), out_dir, tol, seed)
    else:
        code, text = _core.run_scenario_json(json.dumps(scenario), out_dir, tol, seed)
    return code, json.loads(text)


def zoo():
    return [dict(name=n, signature=s, description=d) for n, s, d in _core.zoo_list()]
