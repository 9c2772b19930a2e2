"""Experiment configuration and its ``section.key = value`` file format.

Example::

    experiment.d_x = 1
    experiment.d_y = 2
    experiment.T = 100000
    experiment.trials = 10
    experiment.master_seed = 7
    experiment.algorithm = kwsa_binning
    policy.delta = 0.2
    environment.q = 1.0, 1.0
    environment.center = 0.3, 0.7
    environment.amplitude = 0.4, -0.4
    environment.noise_sigma = 0.1

Lists are comma separated; ``none`` (or an empty value) clears an optional.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..environments import QuadraticEnv
from ..errors import ConfigError, DomainError

__all__ = ["EnvSpec", "ExperimentConfig", "default_checkpoints", "parse_config", "load_config"]

ALGORITHMS = ("kwsa_binning", "discretized_ucb")


@dataclass(frozen=True)
class EnvSpec:
    f0: float = 1.0
    q: tuple[float, ...] = (1.0,)
    center: tuple[float, ...] = (0.5,)
    amplitude: tuple[float, ...] = (0.0,)
    phi: str = "affine"
    alpha: float = 1.0
    noise_sigma: float = 0.1
    noise: str = "gaussian"
    margin: float = 0.05

    def build(self, d_x: int, d_y: int) -> QuadraticEnv:
        q = self.q * d_y if len(self.q) == 1 else self.q
        if len(q) != d_y:
            raise ConfigError(f"environment.q has {len(q)} entries but experiment.d_y = {d_y}")
        try:
            return QuadraticEnv(
                d_x,
                q,
                self.center,
                self.amplitude,
                f0=self.f0,
                phi=self.phi,
                alpha=self.alpha,
                noise_sigma=self.noise_sigma,
                noise=self.noise,
                margin=self.margin,
            )
        except DomainError as exc:
            raise ConfigError(f"invalid environment: {exc}") from exc


def default_checkpoints(T: int) -> tuple[int, ...]:
    """``ceil(T**(k/10))`` for ``k = 1..10``, deduplicated."""
    # the small offset keeps exact powers (e.g. 10**6 ** 0.5) from rounding up
    pts = {max(1, math.ceil(T ** (k / 10) - 1e-9)) for k in range(1, 11)}
    pts.add(T)
    return tuple(sorted(p for p in pts if p <= T))


@dataclass(frozen=True)
class ExperimentConfig:
    d_x: int
    d_y: int
    T: int
    trials: int = 1
    master_seed: int = 0
    algorithm: str = "kwsa_binning"
    environment: EnvSpec = field(default_factory=EnvSpec)
    K_override: int | None = None
    a_override: float | None = None
    delta: float = 0.2
    exploration: float = 1.0
    checkpoints: tuple[int, ...] = ()

    def __post_init__(self):
        if self.d_x < 0 or self.d_y < 1:
            raise ConfigError("require d_x >= 0 and d_y >= 1")
        if self.T < 1:
            raise ConfigError(f"T must be >= 1, got {self.T}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.K_override is not None and self.K_override < 1:
            raise ConfigError("K_override must be a positive integer")
        if self.a_override is not None and not self.a_override > 0:
            raise ConfigError("a_override must be positive")
        if not 0 < self.delta <= 0.5:
            raise ConfigError("delta must lie in (0, 0.5]")
        if not self.exploration > 0:
            raise ConfigError("exploration must be positive")
        ck = tuple(int(c) for c in self.checkpoints) or default_checkpoints(self.T)
        if any(b <= a for a, b in zip(ck, ck[1:])) or ck[0] < 1:
            raise ConfigError("checkpoints must be strictly increasing positive integers")
        if ck[-1] != self.T:
            raise ConfigError(f"last checkpoint must equal T = {self.T}, got {ck[-1]}")
        object.__setattr__(self, "checkpoints", ck)
        self.build_env()

    def build_env(self) -> QuadraticEnv:
        return self.environment.build(self.d_x, self.d_y)

    def with_(self, **changes) -> "ExperimentConfig":
        """Copy with fields replaced; checkpoints are recomputed if ``T`` changes."""
        if "T" in changes and "checkpoints" not in changes:
            changes["checkpoints"] = ()
        return replace(self, **changes)

    def to_text(self) -> str:
        """Canonical file form; parsing it returns an equal config."""
        lines = []
        for key in _KEYS:
            section, name = key.split(".")
            obj = self.environment if section == "environment" else self
            value = getattr(obj, name)
            lines.append(f"{key} = {_format(value)}")
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        """Git blob hash of the canonical text."""
        data = self.to_text().encode()
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _int(text: str) -> int:
    return int(text, 0)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _optional(conv):
    def parse(text: str):
        return None if text.lower() in ("", "none") else conv(text)

    return parse


_KEYS = {
    "experiment.d_x": _int,
    "experiment.d_y": _int,
    "experiment.T": _int,
    "experiment.trials": _int,
    "experiment.master_seed": _int,
    "experiment.algorithm": str,
    "experiment.checkpoints": _ints,
    "policy.K_override": _optional(_int),
    "policy.a_override": _optional(float),
    "policy.delta": float,
    "policy.exploration": float,
    "environment.f0": float,
    "environment.q": _floats,
    "environment.center": _floats,
    "environment.amplitude": _floats,
    "environment.phi": str,
    "environment.alpha": float,
    "environment.noise_sigma": float,
    "environment.noise": str,
    "environment.margin": float,
}
_REQUIRED = ("experiment.d_x", "experiment.d_y", "experiment.T")


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse ``section.key = value`` lines; ``#`` starts a comment."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {value!r}") from exc
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing required keys {missing}")

    env_names = {f.name for f in fields(EnvSpec)}
    env_kw, exp_kw = {}, {}
    for key, value in values.items():
        section, name = key.split(".")
        if section == "environment":
            env_kw[name] = value
        else:
            exp_kw[name] = value
    assert set(env_kw) <= env_names
    d_y = exp_kw["d_y"]
    env_kw.setdefault("q", (1.0,) * d_y)
    try:
        return ExperimentConfig(environment=EnvSpec(**env_kw), **exp_kw)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))
