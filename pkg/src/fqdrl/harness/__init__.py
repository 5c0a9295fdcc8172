"""Experiment orchestration: configs, seeded runs, metrics and comparisons."""

from .config import ExperimentConfig, config_from_dict, load_config
from .metrics import RunMetrics, compare_runs, emit_metrics, moving_average, read_global_csv, read_rewards_csv
from .runner import build_agent, build_env, make_manifest, parameter_counts, run_experiment
from .seeds import agent_generators, agent_seed, splitmix64

__all__ = [
    "ExperimentConfig",
    "RunMetrics",
    "agent_generators",
    "agent_seed",
    "build_agent",
    "build_env",
    "compare_runs",
    "config_from_dict",
    "emit_metrics",
    "load_config",
    "make_manifest",
    "moving_average",
    "parameter_counts",
    "read_global_csv",
    "read_rewards_csv",
    "run_experiment",
    "splitmix64",
]
