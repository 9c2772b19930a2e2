"""Per-bin Kiefer-Wolfowitz stochastic approximation.

Each bin runs cycles of ``d_y + 1`` plays: one play at the current iterate
followed by one finite-difference probe per arm coordinate. After the last
probe of cycle ``n`` the iterate takes a projected ascent step

    y_{n+1} = project(y_n + a_n * G_n),   G_n[i] = s_i * (z_i - z_0) / c_n

with ``a_n = a / n``, ``c_n = delta * n**-0.25`` and ``s_i = -1`` when the
probe had to be reflected to stay inside the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ProtocolError
from .geometry import Box, probe_point, project, unit_box

__all__ = ["StepSchedule", "BinState", "step_sizes", "default_gain"]


@dataclass(frozen=True)
class StepSchedule:
    """Gain scale ``a`` and probe scale ``delta``."""

    a: float
    delta: float = 0.2

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DomainError(f"gain scale a must be positive, got {self.a!r}")
        if not 0 < self.delta <= 0.5:
            raise DomainError(f"delta must lie in (0, 0.5], got {self.delta!r}")

    def admissible(self, M1: float) -> bool:
        """Whether ``a`` lies in the open interval ``(1/(4 M1), 1/(2 M1))``."""
        return 1.0 / (4.0 * M1) < self.a < 1.0 / (2.0 * M1)

    def step_sizes(self, n: int) -> tuple[float, float]:
        return step_sizes(n, self)


def step_sizes(n: int, sched: StepSchedule) -> tuple[float, float]:
    """Return ``(a_n, c_n)`` for cycle ``n >= 1``."""
    if n < 1:
        raise DomainError(f"cycle index must be >= 1, got {n}")
    return sched.a / n, sched.delta * n**-0.25


def default_gain(M1: float) -> float:
    """Midpoint ``3 / (8 M1)`` of the admissible gain interval."""
    if not M1 > 0:
        raise DomainError(f"strong-concavity constant must be positive, got {M1!r}")
    return 3.0 / (8.0 * M1)


@dataclass(slots=True)
class BinState:
    """Mutable KWSA state for a single bin.

    ``phase`` is 0 when the next play is the base play and ``i >= 1`` when
    the next play probes coordinate ``i`` (1-based).
    """

    schedule: StepSchedule
    box: Box
    y_tilde: np.ndarray
    n: int = 1
    phase: int = 0
    z_base: float = math.nan
    probe_diffs: list[float] = field(default_factory=list)
    signs: list[float] = field(default_factory=list)
    plays: int = 0
    last_gradient: np.ndarray | None = None
    pending: bool = False
    _c: float = field(default=math.nan, repr=False)

    @classmethod
    def fresh(cls, schedule: StepSchedule, box: Box | int, y0=None, n: int = 1) -> "BinState":
        """New state at ``y0`` (box center by default) starting at cycle ``n``."""
        if isinstance(box, int):
            box = unit_box(box)
        y = box.center.copy() if y0 is None else np.array(y0, dtype=float)
        if y.shape != (box.dim,):
            raise DomainError(f"initial iterate has shape {y.shape}, expected ({box.dim},)")
        if not box.contains(y):
            raise DomainError("initial iterate lies outside the arm box")
        y.setflags(write=False)
        if n < 1:
            raise DomainError(f"cycle index must be >= 1, got {n}")
        return cls(schedule=schedule, box=box, y_tilde=y, n=n)

    @property
    def d_y(self) -> int:
        return self.box.dim

    def next_arm(self) -> np.ndarray:
        """Arm to play now; the iterate itself is not changed.

        Base plays return the (read-only) iterate array itself.
        """
        if self.pending:
            raise ProtocolError("next_arm called twice without record_payoff")
        self.pending = True
        if self.phase == 0:
            return self.y_tilde
        self._c = self.schedule.delta * self.n**-0.25
        point, sign = probe_point(self.y_tilde, self.phase - 1, self._c, self.box)
        self.signs.append(sign)
        return point

    def record_payoff(self, z: float) -> "BinState":
        """Consume the payoff of the arm most recently returned by ``next_arm``."""
        if not self.pending:
            raise ProtocolError("record_payoff called without a preceding next_arm")
        self.pending = False
        self.plays += 1
        if self.phase == 0:
            self.z_base = z
            self.phase = 1
            return self
        self.probe_diffs.append(self.signs[self.phase - 1] * (z - self.z_base))
        if self.phase < self.d_y:
            self.phase += 1
            return self
        c = self._c
        a_n = self.schedule.a / self.n
        grad = np.array(self.probe_diffs) / c
        y = project(self.y_tilde + a_n * grad, self.box)
        y.setflags(write=False)
        self.y_tilde = y
        self.last_gradient = grad
        self.n += 1
        self.phase = 0
        self.probe_diffs = []
        self.signs = []
        return self
