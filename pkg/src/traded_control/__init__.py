"""Traded control transfer between an ACC agent and a human driver model under sensor conflict."""

from .config import ScenarioConfig, dump_config, load_config, parse_config
from .metrics import SafetyParams, evaluate_pair, threshold_sweep
from .scenario import SimulationTrace, StepRecord, run_pair, run_scenario

__all__ = [
    "SafetyParams",
    "ScenarioConfig",
    "SimulationTrace",
    "StepRecord",
    "dump_config",
    "evaluate_pair",
    "load_config",
    "parse_config",
    "run_pair",
    "run_scenario",
    "threshold_sweep",
]
