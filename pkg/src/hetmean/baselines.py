"""Comparison estimators: median, variance-weighted oracle, known-prior MLE,
and iterative truncation."""

import math
from dataclasses import dataclass

import numpy as np


def sample_median(data):
    """Lower median: the order statistic at index ceil(n/2).

    Deterministic for even n (no midpoint averaging), which keeps the
    estimator exactly translation-equivariant and reproducible.
    """
    x = np.sort(np.asarray(data, dtype=float))
    if x.size == 0:
        raise ValueError("data must be nonempty")
    return float(x[(x.size - 1) // 2])


def oracle_linear(data, sigmas):
    """Precision-weighted mean sum(X_i/s_i^2)/sum(1/s_i^2) with known scales.

    Any sigma of exactly 0 means that point is observed without noise, so the
    estimate is the mean of the exactly-observed points.
    """
    x = np.asarray(data, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    if x.shape != s.shape:
        raise ValueError("data and sigmas must have the same length")
    if np.any(s < 0.0):
        raise ValueError("sigmas must be >= 0")
    exact = s == 0.0
    if np.any(exact):
        return float(x[exact].mean())
    prec = 1.0 / (s * s)
    return float(np.sum(x * (prec / prec.sum())))


def known_prior_mle(data, prior, grid_points):
    """Grid MLE of the location with the mixing distribution known.

    Same grid contract as the profile fit's location step.
    """
    from .profile import estimate_mu_given_g

    return estimate_mu_given_g(data, prior, grid_points)


@dataclass(frozen=True)
class IterTruncConfig:
    """Initial guess, starting clip radius, and shrink schedule.

    Only (mu0, radius) are externally meaningful; the geometric shrink factor
    and the iteration budget are plumbing with conventional defaults.  When
    iterations is None it is derived from the data size as
    max(1, min(30, ceil(log2(radius * sqrt(n))))).
    """

    mu0: float
    radius: float
    shrink: float = 0.5
    iterations: int | None = None

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def iterative_truncation(data, config):
    """Repeatedly average the data clipped to a shrinking interval.

    mu <- mean(clip(X, mu - r_t, mu + r_t)) with r_t = radius * shrink^(t-1).
    """
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ValueError("data must be nonempty")
    iters = config.iterations
    if iters is None:
        iters = max(1, min(30, math.ceil(math.log2(config.radius * math.sqrt(x.size)))))
    mu = float(config.mu0)
    for t in range(iters):
        r = config.radius * config.shrink ** t
        mu = float(np.clip(x, mu - r, mu + r).mean())
    return mu
