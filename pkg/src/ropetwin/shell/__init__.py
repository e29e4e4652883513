"""Service and CLI shell around the simulation/extraction pipeline."""

from ropetwin.shell.bench import run_bench
from ropetwin.shell.cli import build_parser, main
from ropetwin.shell.server import ServeSettings, SimService, build_app
from ropetwin.shell.stateio import load_state, save_state

__all__ = [
    "ServeSettings", "SimService", "build_app", "build_parser",
    "load_state", "main", "run_bench", "save_state",
]
