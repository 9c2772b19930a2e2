"""Regret-exponent fitting and the step-size recursion check."""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy import stats

from ..errors import DomainError, EstimationError

__all__ = [
    "loglog_fit",
    "mean_regret",
    "estimate_exponent",
    "lemma4_lambda",
    "lemma4_check",
    "recursion_coefficients",
]


def loglog_fit(t, values) -> tuple[float, float]:
    """OLS slope of ``log(values)`` on ``log(t)`` and its standard error."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.size < 3:
        raise EstimationError(f"need at least 3 points, got {t.size}")
    fit = stats.linregress(np.log(t), np.log(values))
    return float(fit.slope), float(fit.stderr)


def mean_regret(traces) -> np.ndarray:
    """Mean cumulative regret per checkpoint across traces or an array of rows."""
    rows = [getattr(tr, "cumulative_regret", tr) for tr in traces]
    return np.mean(np.atleast_2d(np.asarray(rows, dtype=float)), axis=0)


def estimate_exponent(traces, checkpoints=None, last: int = 6) -> tuple[float, float]:
    """Growth exponent of mean regret over the last ``last`` checkpoints.

    ``traces`` may hold :class:`RegretTrace` objects (checkpoints taken from
    the first one when not given) or plain arrays of cumulative regret.
    Checkpoints with zero mean regret are dropped before fitting.
    """
    traces = list(traces)
    if not traces:
        raise EstimationError("no traces to fit")
    if checkpoints is None:
        checkpoints = traces[0].checkpoints
    t = np.asarray(checkpoints, dtype=float)
    R = mean_regret(traces)
    if R.shape != t.shape:
        raise EstimationError("checkpoints and regret rows differ in length")
    t, R = t[-last:], R[-last:]
    keep = R > 0
    if keep.sum() < 3:
        raise EstimationError(f"only {int(keep.sum())} checkpoints with positive regret")
    return loglog_fit(t[keep], R[keep])


def lemma4_lambda(alpha_r: float, beta_r: float, omega_r: float, b1: float) -> float:
    """``max(b1, lambda0)`` with ``lambda0 = ((beta + sqrt(beta^2 + 2 omega (2 alpha - 1))) / (2 alpha - 1))^2``."""
    if not 0.5 < alpha_r < 1:
        raise DomainError(f"alpha_r must lie in (0.5, 1), got {alpha_r!r}")
    if beta_r < 0 or omega_r < 0 or b1 < 0:
        raise DomainError("beta_r, omega_r and b1 must be nonnegative")
    k = 2 * alpha_r - 1
    lam0 = ((beta_r + math.sqrt(beta_r**2 + 2 * omega_r * k)) / k) ** 2
    return max(b1, lam0)


@njit(cache=False)
def _recursion_within_bound(alpha_r, beta_r, omega_r, b1, N, lam):
    b = b1
    if b > lam:
        return False
    for n in range(1, N + 1):
        b = (1.0 - alpha_r / n) * b + beta_r * n**-1.25 * math.sqrt(b) + omega_r * n**-1.5
        if b > lam * (n + 1) ** -0.5:
            return False
    return True


def lemma4_check(alpha_r: float, beta_r: float, omega_r: float, b1: float, N: int) -> bool:
    """Iterate the recursion with equality and test ``b_n <= lambda n^{-1/2}``.

    Covers ``b_1`` through ``b_{N+1}``.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    lam = lemma4_lambda(alpha_r, beta_r, omega_r, b1)
    return bool(_recursion_within_bound(float(alpha_r), float(beta_r), float(omega_r), float(b1), int(N), lam))


def recursion_coefficients(a: float, delta: float, M1: float, M3: float, M5: float, d_y: int, beta_reading: str = "a"):
    """Coefficients ``(alpha, beta, omega)`` of the squared-error recursion.

    ``alpha = 2 a M1`` and ``omega = 4 d_y a^2 M3^2 / delta^2``. The cross
    term is ``a delta M5`` as it appears in the recursion itself
    (``beta_reading="a"``), or ``alpha delta M5`` (``beta_reading="alpha"``).
    """
    alpha_r = 2 * a * M1
    if beta_reading == "a":
        beta_r = a * delta * M5
    elif beta_reading == "alpha":
        beta_r = alpha_r * delta * M5
    else:
        raise DomainError(f"beta_reading must be 'a' or 'alpha', got {beta_reading!r}")
    omega_r = 4 * d_y * a**2 * M3**2 / delta**2
    return alpha_r, beta_r, omega_r
