"""Python access to the rydgauge library and CLI subcommands."""

import json

from ._core import (
    ConfigError,
    NumericalError,
    abelian_curvature,
    chern_number,
    eigenvalues,
    hamiltonian,
    locate_avoided_crossing,
    locate_degeneracy,
    locate_well,
    mass_parameter,
    version,
)
from . import _core

__all__ = [
    "ConfigError",
    "NumericalError",
    "abelian_curvature",
    "chern_number",
    "eigenvalues",
    "hamiltonian",
    "locate_avoided_crossing",
    "locate_degeneracy",
    "locate_well",
    "mass_parameter",
    "run",
    "selftest",
    "version",
]


def run(command, config=None, out_dir=".", threads=1, seed=None):
    """Run a subcommand with a config dict (or config text) and return its summary dict."""
    if config is None:
        text = ""
    elif isinstance(config, str):
        text = config
    else:
        text = json.dumps(config)
    return json.loads(_core.run_command(command, text, str(out_dir), threads, seed))


def selftest():
    """Run the invariant suite; returns the summary dict with an ``all_passed`` flag."""
    return run("selftest")
