"""Synthetic concave payoff environments with analytic oracles.

The family is a separable quadratic whose peak drifts with the context:

    f(x, y) = f0 - 1/2 * sum_i q_i (y_i - y*_i(x))^2
    y*_i(x) = center_i + amplitude_i * h(x_{i mod d_x})

where ``h(u) = u`` (``phi="affine"``, Lipschitz) or ``h(u) = u**alpha``
(``phi="holder"``). With ``d_x == 0`` the peak is fixed at ``center``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DomainError, NumericError

__all__ = [
    "EnvConstants",
    "QuadraticEnv",
    "sample_context",
    "sample_contexts",
    "gauss_legendre_box",
    "box_expectation",
]

M2_FLOOR = 1e-12
QUAD_ORDER = 8
TRUNCATION = 3.0  # truncated-Gaussian noise lives in +/- 3 sigma


@dataclass(frozen=True)
class EnvConstants:
    """Regularity constants of an environment."""

    M1: float
    M2: float
    M3: float
    M4: float
    M5: float
    M6: float
    alpha: float


@lru_cache(maxsize=None)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def gauss_legendre_box(lower, upper, order: int = QUAD_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes and normalized weights on a box.

    Weights sum to one, so ``weights @ g(nodes)`` is the mean of ``g`` under
    the uniform distribution on the box. Degenerate axes (``lower == upper``)
    collapse to a single node.
    """
    lower = np.asarray(lower, dtype=float).reshape(-1)
    upper = np.asarray(upper, dtype=float).reshape(-1)
    t, w = _leggauss(order)
    axes_nodes, axes_weights = [], []
    for lo, hi in zip(lower, upper):
        if hi < lo:
            raise DomainError("box requires lower <= upper")
        if hi == lo:
            axes_nodes.append(np.array([lo]))
            axes_weights.append(np.array([1.0]))
        else:
            axes_nodes.append(0.5 * (hi - lo) * t + 0.5 * (hi + lo))
            axes_weights.append(0.5 * w)
    if not axes_nodes:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*axes_nodes, indexing="ij")
    nodes = np.stack([g.reshape(-1) for g in grids], axis=1)
    wgrid = np.meshgrid(*axes_weights, indexing="ij")
    weights = np.prod(np.stack([g.reshape(-1) for g in wgrid], axis=1), axis=1)
    return nodes, weights


def box_expectation(func, lower, upper, order: int = QUAD_ORDER) -> np.ndarray:
    """Mean of ``func(nodes) -> (n_nodes, ...)`` under the uniform law on a box."""
    nodes, weights = gauss_legendre_box(lower, upper, order)
    values = np.asarray(func(nodes), dtype=float)
    out = np.tensordot(weights, values, axes=(0, 0))
    if not np.all(np.isfinite(out)):
        raise NumericError("quadrature produced a non-finite value")
    return out


def sample_context(d_x: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform context on ``[0, 1]^d_x`` (empty when ``d_x == 0``)."""
    return rng.random(d_x)


def sample_contexts(d_x: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. contexts; consumes the stream exactly like ``n`` single draws."""
    return rng.random((n, d_x))


def _vector(value, d_y: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.size == 1 and d_y != 1:
        arr = np.full(d_y, arr.item())
    if arr.size != d_y:
        raise DomainError(f"{name} has length {arr.size}, expected {d_y}")
    arr.setflags(write=False)
    return arr


class QuadraticEnv:
    """Separable quadratic payoff with Hölder context drift.

    Parameters
    ----------
    d_x : int
        Context dimension (0 for the context-free case).
    q : sequence of float
        Per-coordinate curvatures; ``d_y = len(q)``.
    center, amplitude : sequence of float or float
        Peak location is ``center + amplitude * h(x)``.
    phi : {"affine", "holder"}
    alpha : float
        Hölder exponent of ``h``; must be 1 for ``phi="affine"``.
    noise_sigma : float
        Payoff noise scale.
    noise : {"gaussian", "truncated"}
        ``"truncated"`` draws Gaussian noise truncated to ``+/- 3 sigma``.
    margin : float
        Required distance of every peak from the boundary of ``[0, 1]^d_y``.
    """

    def __init__(
        self,
        d_x: int,
        q: Sequence[float],
        center=0.5,
        amplitude=0.0,
        *,
        f0: float = 1.0,
        phi: str = "affine",
        alpha: float = 1.0,
        noise_sigma: float = 0.1,
        noise: str = "gaussian",
        margin: float = 0.05,
    ):
        q = np.asarray(q, dtype=float).reshape(-1)
        if d_x < 0:
            raise DomainError(f"d_x must be nonnegative, got {d_x}")
        if q.size < 1 or not np.all(q > 0):
            raise DomainError("curvatures q must be positive and nonempty")
        d_y = q.size
        if phi not in ("affine", "holder"):
            raise DomainError(f"phi must be 'affine' or 'holder', got {phi!r}")
        if not 0 < alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
        if phi == "affine" and alpha != 1:
            raise DomainError("affine context map is Lipschitz; alpha must be 1")
        if noise not in ("gaussian", "truncated"):
            raise DomainError(f"noise must be 'gaussian' or 'truncated', got {noise!r}")
        if noise_sigma < 0:
            raise DomainError("noise_sigma must be nonnegative")
        if not 0 < margin < 0.5:
            raise DomainError("margin must lie in (0, 0.5)")

        q.setflags(write=False)
        self._q = q.tolist()
        self.d_x = int(d_x)
        self.d_y = d_y
        self.q = q
        self.f0 = float(f0)
        self.center = _vector(center, d_y, "center")
        self.amplitude = _vector(amplitude, d_y, "amplitude")
        self.phi = phi
        self.alpha = float(alpha)
        self.noise_sigma = float(noise_sigma)
        self.noise = noise
        self.margin = float(margin)
        # context coordinate driving each arm coordinate
        self._axis = np.arange(d_y) % d_x if d_x > 0 else np.zeros(d_y, dtype=int)

        reach = self.amplitude if d_x > 0 else np.zeros(d_y)
        lo = self.center + np.minimum(reach, 0.0)
        hi = self.center + np.maximum(reach, 0.0)
        if np.any(lo < margin) or np.any(hi > 1.0 - margin):
            raise DomainError(
                f"optimal arms must stay within [{margin}, {1 - margin}]; "
                f"got range [{lo.min():.4g}, {hi.max():.4g}]"
            )

    def __repr__(self):
        return (
            f"QuadraticEnv(d_x={self.d_x}, q={self.q.tolist()}, center={self.center.tolist()}, "
            f"amplitude={self.amplitude.tolist()}, f0={self.f0}, phi={self.phi!r}, "
            f"alpha={self.alpha}, noise_sigma={self.noise_sigma}, noise={self.noise!r})"
        )

    # -- context map -----------------------------------------------------

    def _features(self, X: np.ndarray) -> np.ndarray:
        """``h(x_{i mod d_x})`` for a batch ``X`` of shape ``(n, d_x)``."""
        if self.d_x == 0:
            return np.zeros((X.shape[0], self.d_y))
        u = X[:, self._axis]
        return u if self.phi == "affine" else u**self.alpha

    def optimal_arms(self, X) -> np.ndarray:
        """Batch oracle: ``y*(x)`` for every row of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.d_x:
            raise DomainError(f"contexts have {X.shape[1]} coordinates, expected {self.d_x}")
        return self.center + self.amplitude * self._features(X)

    def _check_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.d_x:
            raise DomainError(f"context has {x.size} coordinates, expected {self.d_x}")
        if np.any(x < 0) or np.any(x > 1):
            raise DomainError("context outside [0, 1]^d_x")
        return x

    def _check_y(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.size != self.d_y:
            raise DomainError(f"arm has {y.size} coordinates, expected {self.d_y}")
        if np.any(y < 0) or np.any(y > 1):
            raise DomainError("arm outside [0, 1]^d_y")
        return y

    # -- payoffs ---------------------------------------------------------

    def gap(self, y_star, y) -> float:
        """``f*(x) - f(x, y)`` given the peak ``y_star`` of ``x``; no validation.

        Plain float arithmetic: arms are short, and this runs once per epoch.
        """
        if isinstance(y, np.ndarray):
            y = y.tolist()
        if isinstance(y_star, np.ndarray):
            y_star = y_star.tolist()
        s = 0.0
        for qi, a, b in zip(self._q, y, y_star):
            d = a - b
            s += qi * d * d
        return 0.5 * s

    def mean_payoff(self, x, y) -> float:
        x = self._check_x(x)
        y = self._check_y(y)
        return self.f0 - self.gap(self.optimal_arms(x)[0], y)

    def gradient(self, x, y) -> np.ndarray:
        """Analytic ``d f / d y``."""
        x = self._check_x(x)
        y = self._check_y(y)
        return -self.q * (y - self.optimal_arms(x)[0])

    def sample_noise(self, size, rng: np.random.Generator) -> np.ndarray:
        """Zero-mean payoff noise draws."""
        if self.noise_sigma == 0:
            return np.zeros(size)
        if self.noise == "gaussian":
            return self.noise_sigma * rng.standard_normal(size)
        draws = stats.truncnorm.rvs(-TRUNCATION, TRUNCATION, size=size, random_state=rng)
        return self.noise_sigma * np.asarray(draws, dtype=float)

    def sample_payoff(self, x, y, rng: np.random.Generator) -> float:
        """Noisy payoff ``f(x, y) + noise``."""
        return self.mean_payoff(x, y) + float(self.sample_noise(1, rng)[0])

    def oracle_best(self, x) -> tuple[np.ndarray, float]:
        x = self._check_x(x)
        return self.optimal_arms(x)[0], self.f0

    def instant_regret(self, x, y) -> float:
        x = self._check_x(x)
        y = self._check_y(y)
        return self.gap(self.optimal_arms(x)[0], y)

    # -- bin oracles -----------------------------------------------------

    def bin_optimum(self, lower, upper, order: int = QUAD_ORDER) -> np.ndarray:
        """Maximizer of the bin payoff ``E[f(X, y) | X in bin]``.

        Curvature does not depend on ``x``, so the maximizer is the bin mean
        of ``y*(X)``: closed form for the affine map, quadrature otherwise.
        """
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        if lower.size != self.d_x or upper.size != self.d_x:
            raise DomainError(f"bin must have {self.d_x} axes")
        if np.any(lower < 0) or np.any(upper > 1) or np.any(lower > upper):
            raise DomainError("bin must be a sub-box of [0, 1]^d_x")
        if self.d_x == 0:
            return self.center.copy()
        if self.phi == "affine":
            mid = 0.5 * (lower + upper)
            return self.center + self.amplitude * mid[self._axis]
        mean_phi = box_expectation(self._features, lower, upper, order)
        return self.center + self.amplitude * mean_phi

    def bin_payoff(self, lower, upper, y, order: int = QUAD_ORDER) -> float:
        """``f_B(y)`` by tensor Gauss quadrature over the bin."""
        y = self._check_y(y)

        def f(nodes):
            d = y - self.optimal_arms(nodes)
            return self.f0 - 0.5 * (d * d) @ self.q

        return float(box_expectation(f, lower, upper, order))

    def bin_gradient(self, lower, upper, y, order: int = QUAD_ORDER) -> np.ndarray:
        """``grad f_B(y)`` as the bin mean of the analytic gradient."""
        y = self._check_y(y)
        return box_expectation(lambda nodes: -self.q * (y - self.optimal_arms(nodes)), lower, upper, order)

    # -- constants -------------------------------------------------------

    def holder_constant(self) -> float:
        """Hölder constant of ``f(., y)`` in ``x`` with exponent ``alpha``.

        ``|u**a - v**a| <= |u - v|**a`` on ``[0, 1]`` and arms differ from
        peaks by at most 1 per coordinate, which gives ``sum q_i |amp_i|``.
        """
        if self.d_x == 0:
            return M2_FLOOR
        return max(float(np.dot(self.q, np.abs(self.amplitude))), M2_FLOOR)

    def constants(self) -> EnvConstants:
        M1 = float(self.q.min())
        M5 = float(self.q.max())
        M2 = self.holder_constant()
        M3 = (abs(self.f0) + 0.5 * M5 * self.d_y) ** 2 + self.noise_sigma**2
        return EnvConstants(
            M1=M1,
            M2=M2,
            M3=M3,
            M4=M5 * math.sqrt(self.d_y),
            M5=M5,
            M6=math.sqrt(2.0 * M2 / M1),
            alpha=self.alpha,
        )
