"""Sweep orchestration, result I/O, plotting and the command-line interface."""

from .config import SweepConfig, load_config
from .results import Row, SweepResult, read_csv, write_csv
from .runner import run_sweep
from .svg import plot_svg

__all__ = ["SweepConfig", "load_config", "Row", "SweepResult", "read_csv", "write_csv", "run_sweep", "plot_svg"]
