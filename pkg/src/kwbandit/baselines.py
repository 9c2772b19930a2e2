"""Uniform-discretization baseline: UCB1 over a finite arm grid per context bin."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ProtocolError
from .geometry import Partition, bin_index

__all__ = ["choose_grid", "arm_grid", "DiscretizedUcbPolicy"]


def choose_grid(T: int, d_x: int, d_y: int) -> tuple[int, int]:
    """Context bins per axis and arm grid points per axis, both ``T**(1/(d_x+d_y+2))``."""
    if T < 1:
        raise DomainError(f"horizon must be >= 1, got {T}")
    g = max(1, math.floor(T ** (1.0 / (d_x + d_y + 2)) + 0.5))
    return g, g


def arm_grid(G: int, d_y: int) -> np.ndarray:
    """``G**d_y`` arms at cell centers, row-major over the per-axis index."""
    ticks = (np.arange(G) + 0.5) / G
    return np.array(list(itertools.product(ticks, repeat=d_y)), dtype=float).reshape(-1, d_y)


@dataclass
class _UcbBin:
    counts: np.ndarray
    means: np.ndarray
    pulls: int = 0
    pending: int | None = None
    _unpulled: int = 0  # arms [0, _unpulled) have been swept


@dataclass
class DiscretizedUcbPolicy:
    """Independent UCB1 learners over ``arms`` for each context bin.

    Index: ``mean + exploration * sqrt(2 ln t_B / count)``; ties go to the
    lowest arm index. Unpulled arms are swept in index order first.
    """

    context_partition: Partition
    arms: np.ndarray
    exploration: float = 1.0
    bins: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.exploration > 0:
            raise DomainError("exploration coefficient must be positive")
        self.arms = np.asarray(self.arms, dtype=float)

    @classmethod
    def for_horizon(cls, T: int, d_x: int, d_y: int, exploration: float = 1.0) -> "DiscretizedUcbPolicy":
        K_b, G = choose_grid(T, d_x, d_y)
        return cls(Partition(d_x, K_b if d_x > 0 else 1), arm_grid(G, d_y), exploration)

    def _bin(self, b: int) -> _UcbBin:
        st = self.bins.get(b)
        if st is None:
            n = len(self.arms)
            st = _UcbBin(np.zeros(n, dtype=np.int64), np.zeros(n))
            self.bins[b] = st
        return st

    def select(self, b: int) -> int:
        st = self._bin(b)
        if st._unpulled < len(self.arms):
            return st._unpulled
        bonus = self.exploration * np.sqrt(2.0 * math.log(st.pulls) / st.counts)
        return int(np.argmax(st.means + bonus))

    def act(self, x) -> np.ndarray:
        b = bin_index(x, self.context_partition)
        st = self._bin(b)
        if st.pending is not None:
            raise ProtocolError(f"bin {b} already has an arm awaiting its payoff")
        st.pending = self.select(b)
        return self.arms[st.pending].copy()

    def update(self, x, z: float) -> "DiscretizedUcbPolicy":
        b = bin_index(x, self.context_partition)
        st = self.bins.get(b)
        if st is None or st.pending is None:
            raise ProtocolError(f"no pending act for bin {b}")
        k = st.pending
        st.pending = None
        st.counts[k] += 1
        st.means[k] += (z - st.means[k]) / st.counts[k]
        st.pulls += 1
        if k == st._unpulled:
            st._unpulled += 1
        return self

    def visits(self) -> dict[int, int]:
        return {b: s.pulls for b, s in sorted(self.bins.items())}

    def iterates(self) -> dict[int, np.ndarray]:
        """Most-pulled arm per bin (lowest index on ties)."""
        return {b: self.arms[int(np.argmax(s.counts))].copy() for b, s in sorted(self.bins.items())}
