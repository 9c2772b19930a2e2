"""Experiment runner: configs, trial loops, exponent fits and output files."""

from .analysis import estimate_exponent, lemma4_check, lemma4_lambda, loglog_fit, recursion_coefficients
from .config import EnvSpec, ExperimentConfig, default_checkpoints, load_config, parse_config
from .output import emit_csv, emit_summary, read_csv, read_summary
from .runner import RegretTrace, run_experiment, run_trial, splitmix64, trial_rng, trial_seed

__all__ = [
    "EnvSpec",
    "ExperimentConfig",
    "RegretTrace",
    "default_checkpoints",
    "emit_csv",
    "emit_summary",
    "estimate_exponent",
    "lemma4_check",
    "lemma4_lambda",
    "load_config",
    "loglog_fit",
    "parse_config",
    "read_csv",
    "read_summary",
    "recursion_coefficients",
    "run_experiment",
    "run_trial",
    "splitmix64",
    "trial_rng",
    "trial_seed",
]
