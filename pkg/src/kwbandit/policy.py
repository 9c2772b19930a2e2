"""Contextual policy: one KWSA learner per context bin."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ProtocolError
from .geometry import Box, Partition, bin_index, unit_box
from .kwsa import BinState, StepSchedule

__all__ = ["choose_K", "KwsaBinningPolicy"]


def choose_K(T: int, d_x: int, d_y: int, alpha: float = 1.0) -> int:
    """Bins per context axis for horizon ``T``.

    ``K = round((d_x**(alpha-2) * d_y**(alpha-3) * T) ** (1 / (d_x + 2 alpha)))``,
    at least 1; the context-free case uses a single bin.
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    if T < 1 or d_y < 1 or d_x < 0:
        raise DomainError("choose_K requires T >= 1, d_y >= 1, d_x >= 0")
    if d_x == 0:
        return 1
    base = d_x ** (alpha - 2) * d_y ** (alpha - 3) * T
    return max(1, math.floor(base ** (1.0 / (d_x + 2 * alpha)) + 0.5))


class KwsaBinningPolicy:
    """Route each context to its bin's :class:`BinState`.

    Bins are created on first visit, starting from ``y0`` (box center by
    default).
    """

    def __init__(self, partition: Partition, schedule: StepSchedule, box: Box | int, y0=None):
        self.partition = partition
        self.schedule = schedule
        self.box = unit_box(box) if isinstance(box, int) else box
        self.y0 = None if y0 is None else np.array(y0, dtype=float)
        self.bins: dict[int, BinState] = {}
        self._last = (None, -1)  # (context, bin) of the latest act

    @property
    def epochs(self) -> int:
        return sum(state.plays for state in self.bins.values())

    def state(self, b: int) -> BinState:
        state = self.bins.get(b)
        if state is None:
            state = BinState.fresh(self.schedule, self.box, self.y0)
            self.bins[b] = state
        return state

    def act(self, x) -> np.ndarray:
        b = bin_index(x, self.partition)
        state = self.state(b)
        if state.pending:
            raise ProtocolError(f"bin {b} already has an arm awaiting its payoff")
        self._last = (x, b)
        return state.next_arm()

    def update(self, x, z: float) -> "KwsaBinningPolicy":
        last_x, b = self._last
        if x is not last_x:
            b = bin_index(x, self.partition)
        state = self.bins.get(b)
        if state is None or not state.pending:
            raise ProtocolError(f"no pending act for bin {b}")
        state.record_payoff(z)
        return self

    def iterates(self) -> dict[int, np.ndarray]:
        return {b: s.y_tilde.copy() for b, s in sorted(self.bins.items())}

    def visits(self) -> dict[int, int]:
        return {b: s.plays for b, s in sorted(self.bins.items())}
