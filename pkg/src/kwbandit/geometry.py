"""Context-space partitioning, arm-box projection and probe construction.

Bins are half-open cells ``[(k-1)/K, k/K)`` per axis, with the last cell
closed at 1 so every context in ``[0, 1]^d_x`` has exactly one owner.
Flat bin ids are row-major over the 1-based multi-index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "Partition",
    "Box",
    "unit_box",
    "bin_index",
    "bin_multi_index",
    "project",
    "probe_point",
]


@dataclass(frozen=True)
class Partition:
    """Uniform ``K``-per-axis grid over ``[0, 1]^d_x``."""

    d_x: int
    K: int

    def __post_init__(self):
        if self.d_x < 0:
            raise DomainError(f"d_x must be nonnegative, got {self.d_x}")
        if self.K < 1:
            raise DomainError(f"K must be a positive integer, got {self.K}")

    @property
    def n_bins(self) -> int:
        return self.K**self.d_x

    def unflatten(self, flat: int) -> tuple[int, ...]:
        """1-based multi-index of a flat bin id."""
        if not 0 <= flat < self.n_bins:
            raise DomainError(f"bin id {flat} outside [0, {self.n_bins})")
        digits = []
        for _ in range(self.d_x):
            flat, r = divmod(flat, self.K)
            digits.append(r + 1)
        return tuple(reversed(digits))

    def bounds(self, flat: int) -> tuple[np.ndarray, np.ndarray]:
        """Closed lower/upper corners of a bin."""
        k = np.asarray(self.unflatten(flat), dtype=float)
        return (k - 1.0) / self.K, k / self.K

    def diameter(self) -> float:
        """Euclidean diameter of every bin."""
        return math.sqrt(self.d_x) / self.K


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower, upper]`` used as the arm space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise DomainError("box bounds must have equal length")
        if not np.all(lower < upper):
            raise DomainError("box requires lower < upper in every coordinate")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(y >= self.lower) and np.all(y <= self.upper))


def unit_box(d_y: int) -> Box:
    return Box(np.zeros(d_y), np.ones(d_y))


def bin_multi_index(x: Sequence[float], partition: Partition) -> tuple[int, ...]:
    """1-based multi-index of the bin owning ``x``."""
    if len(x) != partition.d_x:
        raise DomainError(f"context has {len(x)} coordinates, expected {partition.d_x}")
    K = partition.K
    out = []
    for xl in x:
        xl = float(xl)
        if not 0.0 <= xl <= 1.0:
            raise DomainError(f"context coordinate {xl!r} outside [0, 1]")
        out.append(min(int(xl * K) + 1, K))
    return tuple(out)


def bin_index(x: Sequence[float], partition: Partition) -> int:
    """Flat row-major id of the bin owning ``x``; ``d_x == 0`` always gives 0."""
    if len(x) != partition.d_x:
        raise DomainError(f"context has {len(x)} coordinates, expected {partition.d_x}")
    K = partition.K
    flat = 0
    for xl in x:
        if not 0.0 <= xl <= 1.0:
            raise DomainError(f"context coordinate {xl!r} outside [0, 1]")
        k = int(xl * K)
        flat = flat * K + (k if k < K else K - 1)
    return flat


def project(y, box: Box) -> np.ndarray:
    """Euclidean projection onto ``box`` (componentwise clamp)."""
    return np.minimum(np.maximum(np.asarray(y, dtype=float), box.lower), box.upper)


def probe_point(y_base, i: int, c: float, box: Box) -> tuple[np.ndarray, float]:
    """Point ``y_base + c e_i``, or ``y_base - c e_i`` when the first leaves the box.

    ``i`` is 0-based. Returns the point and the sign of the displacement.
    """
    if c <= 0:
        raise ParameterError(f"probe radius must be positive, got {c!r}")
    point = np.array(y_base, dtype=float)
    base = point[i]
    if base + c <= box.upper[i]:
        point[i] = base + c
        return point, 1.0
    if base - c >= box.lower[i]:
        point[i] = base - c
        return point, -1.0
    raise ParameterError(
        f"probe radius {c!r} too large: both y[{i}] +/- c leave [{box.lower[i]}, {box.upper[i]}]"
    )
