"""Experiment configuration, drivers, result tables and command line."""

from .config import PRESETS, ExperimentConfig, load_config
from .experiments import run
from .table import ResultTable

__all__ = ["PRESETS", "ExperimentConfig", "ResultTable", "load_config", "run"]
