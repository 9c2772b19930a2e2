"""Contextual continuum-armed bandits with concave payoffs.

Kiefer-Wolfowitz stochastic approximation run independently in each bin of
a uniform context partition, plus synthetic environments, a discretized UCB1
baseline and a regret-measurement harness.
"""

from .baselines import DiscretizedUcbPolicy, arm_grid, choose_grid
from .environments import EnvConstants, QuadraticEnv, sample_context, sample_contexts
from .errors import (
    ConfigError,
    DomainError,
    EstimationError,
    KwbanditError,
    NumericError,
    ParameterError,
    ProtocolError,
)
from .geometry import Box, Partition, bin_index, bin_multi_index, probe_point, project, unit_box
from .kwsa import BinState, StepSchedule, default_gain, step_sizes
from .policy import KwsaBinningPolicy, choose_K

__version__ = "0.1.0"

__all__ = [
    "BinState",
    "Box",
    "ConfigError",
    "DiscretizedUcbPolicy",
    "DomainError",
    "EnvConstants",
    "EstimationError",
    "KwbanditError",
    "KwsaBinningPolicy",
    "NumericError",
    "ParameterError",
    "Partition",
    "ProtocolError",
    "QuadraticEnv",
    "StepSchedule",
    "arm_grid",
    "bin_index",
    "bin_multi_index",
    "choose_K",
    "choose_grid",
    "default_gain",
    "probe_point",
    "project",
    "sample_context",
    "sample_contexts",
    "step_sizes",
    "unit_box",
]
