"""Trial loop, deterministic seeding and experiment aggregation."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..baselines import DiscretizedUcbPolicy
from ..environments import QuadraticEnv, sample_contexts
from ..geometry import Partition, unit_box
from ..kwsa import StepSchedule, default_gain
from ..policy import KwsaBinningPolicy, choose_K
from .config import ExperimentConfig

__all__ = [
    "splitmix64",
    "trial_seed",
    "trial_rng",
    "RegretTrace",
    "build_policy",
    "resolve_K",
    "run_trial",
    "run_experiment",
]

log = logging.getLogger(__name__)

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """One step of the SplitMix64 generator: add the golden gamma, then finalize."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def trial_seed(master_seed: int, trial_index: int) -> int:
    """``splitmix64(master_seed XOR splitmix64(trial_index))``."""
    return splitmix64((master_seed & _MASK) ^ splitmix64(trial_index & _MASK))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed(master_seed, trial_index)))


@dataclass
class RegretTrace:
    trial: int
    checkpoints: np.ndarray
    cumulative_regret: np.ndarray
    bin_visits: dict[int, int] = field(default_factory=dict)
    final_iterates: dict[int, np.ndarray] = field(default_factory=dict)
    # squared distance of the tracked bin's iterate to its optimum; entry n-1 is cycle n
    iterate_errors: np.ndarray | None = None

    @property
    def final_regret(self) -> float:
        return float(self.cumulative_regret[-1])


def resolve_K(config: ExperimentConfig) -> int:
    if config.K_override is not None:
        return config.K_override
    return choose_K(config.T, config.d_x, config.d_y, config.environment.alpha)


def build_policy(config: ExperimentConfig, env: QuadraticEnv):
    if config.algorithm == "discretized_ucb":
        return DiscretizedUcbPolicy.for_horizon(config.T, config.d_x, config.d_y, config.exploration)
    M1 = env.constants().M1
    a = config.a_override if config.a_override is not None else default_gain(M1)
    schedule = StepSchedule(a=a, delta=config.delta)
    if not schedule.admissible(M1):
        log.warning("gain a=%g outside (1/(4 M1), 1/(2 M1)) for M1=%g", a, M1)
    K = resolve_K(config)
    return KwsaBinningPolicy(Partition(config.d_x, K), schedule, unit_box(config.d_y))


def run_trial(config: ExperimentConfig, trial_index: int, track_bin: int | None = None) -> RegretTrace:
    """Play ``T`` epochs and record pseudo-regret at the checkpoints.

    The trial stream draws all contexts first, then all noise, from the
    generator seeded by :func:`trial_seed`.
    """
    env = config.build_env()
    policy = build_policy(config, env)
    rng = trial_rng(config.master_seed, trial_index)
    T = config.T
    X = sample_contexts(config.d_x, T, rng)
    noise = env.sample_noise(T, rng).tolist()
    y_star = env.optimal_arms(X).tolist()
    contexts = X.tolist()

    errors = None
    if track_bin is not None:
        if not isinstance(policy, KwsaBinningPolicy):
            raise ValueError("iterate tracking needs the kwsa_binning policy")
        lower, upper = policy.partition.bounds(track_bin)
        target = env.bin_optimum(lower, upper)
        tracked = policy.state(track_bin)
        errors = [float(np.sum((tracked.y_tilde - target) ** 2))]
        cycle = tracked.n

    checkpoints = list(config.checkpoints)
    out = []
    next_ck = checkpoints[0]
    f0 = env.f0
    gap = env.gap
    act, update = policy.act, policy.update
    R = 0.0
    for t in range(1, T + 1):
        x = contexts[t - 1]
        y = act(x)
        g = gap(y_star[t - 1], y)
        update(x, f0 - g + noise[t - 1])
        R += g
        if errors is not None and tracked.n != cycle:
            cycle = tracked.n
            errors.append(float(np.sum((tracked.y_tilde - target) ** 2)))
        if t == next_ck:
            out.append(R)
            next_ck = checkpoints[len(out)] if len(out) < len(checkpoints) else -1
    return RegretTrace(
        trial=trial_index,
        checkpoints=np.asarray(checkpoints, dtype=np.int64),
        cumulative_regret=np.asarray(out),
        bin_visits=policy.visits(),
        final_iterates=policy.iterates(),
        iterate_errors=None if errors is None else np.asarray(errors),
    )


def _run_one(args):
    config, index, track_bin = args
    return run_trial(config, index, track_bin)


def run_experiment(config: ExperimentConfig, workers: int = 1, track_bin: int | None = None) -> list[RegretTrace]:
    """All trials, ordered by trial index regardless of ``workers``."""
    jobs = [(config, i, track_bin) for i in range(config.trials)]
    if workers <= 1 or config.trials == 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
