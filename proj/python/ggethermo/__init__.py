"""Thermodynamics of multiple conserved quantities.

Generalized Gibbs states for several (possibly non-commuting) charges,
explicit bath-trade and extraction protocols, battery ladders, and exact
Farey/Bezout selection of robust bath pairs.
"""

import json as _json

try:
    from ggethermo._ggethermo import (
        ConfigError,
        Error,
        ExcludedRatioError,
        bezout,
        eigenstate_levels,
        farey_sequence,
        free_entropy,
        gibbs,
        interconversion_rate,
        plan_trade,
        relative_entropy,
        robust_select,
        run_config,
        run_extraction,
        second_law_audit,
        solve_betas,
        sweep_config,
        verify_coverage,
    )
except ImportError:  # build tree: extension module sits next to the package
    from _ggethermo import (
        ConfigError,
        Error,
        ExcludedRatioError,
        bezout,
        eigenstate_levels,
        farey_sequence,
        free_entropy,
        gibbs,
        interconversion_rate,
        plan_trade,
        relative_entropy,
        robust_select,
        run_config,
        run_extraction,
        second_law_audit,
        solve_betas,
        sweep_config,
        verify_coverage,
    )

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Error",
    "ExcludedRatioError",
    "bezout",
    "eigenstate_levels",
    "farey_sequence",
    "free_entropy",
    "gibbs",
    "interconversion_rate",
    "plan_trade",
    "relative_entropy",
    "robust_select",
    "run",
    "run_config",
    "run_extraction",
    "second_law_audit",
    "solve_betas",
    "sweep",
    "sweep_config",
    "verify_coverage",
]


def run(config, seed=None):
    """Run one experiment from a config dict.

    Returns {"report": {...}, "steps": {"columns": [...], "rows": [...]}},
    the same artifacts the command-line tool writes.
    """
    doc = dict(config)
    if seed is not None:
        doc["seed"] = seed
    return _json.loads(run_config(_json.dumps(doc)))


def sweep(config):
    """Run the config's parameter grid; returns {"columns", "rows"}."""
    return _json.loads(sweep_config(_json.dumps(config)))
