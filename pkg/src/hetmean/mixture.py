"""Discrete scale-mixing distributions and stable normal scale-mixture densities."""

import math
from dataclasses import dataclass

import numpy as np

from .gauss import LOG_SQRT2PI

ATOM_MERGE_RTOL = 1e-12
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MixingDistribution:
    """Discrete prior over scales: atoms sigma_j >= 0 with simplex weights.

    Atoms are stored strictly increasing; duplicates within a relative
    tolerance of 1e-12 are merged by summing their weights.  An atom at
    exactly 0 is permitted only when constructed explicitly (degenerate
    prior); the NPMLE solver never produces one.
    """

    atoms: tuple
    weights: tuple

    def __post_init__(self):
        atoms = [float(a) for a in self.atoms]
        weights = [float(w) for w in self.weights]
        if len(atoms) != len(weights) or not atoms:
            raise ValueError("atoms and weights must be nonempty and same length")
        if any(a < 0.0 or not math.isfinite(a) for a in atoms):
            raise ValueError("atoms must be finite and >= 0")
        if any(w < 0.0 or not math.isfinite(w) for w in weights):
            raise ValueError("weights must be finite and >= 0")
        total = math.fsum(weights)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {total!r}")

        order = sorted(range(len(atoms)), key=lambda i: atoms[i])
        merged_a, merged_w = [], []
        for i in order:
            a, w = atoms[i], weights[i]
            if merged_a and (a - merged_a[-1]) <= ATOM_MERGE_RTOL * max(a, merged_a[-1]):
                merged_w[-1] += w
            else:
                merged_a.append(a)
                merged_w.append(w)
        object.__setattr__(self, "atoms", tuple(merged_a))
        object.__setattr__(self, "weights", tuple(merged_w))

    @classmethod
    def point(cls, sigma):
        return cls(atoms=(float(sigma),), weights=(1.0,))

    def arrays(self):
        return np.array(self.atoms, dtype=float), np.array(self.weights, dtype=float)

    def scaled(self, c):
        """Pushforward under sigma -> c*sigma for c > 0."""
        if c <= 0.0:
            raise ValueError("scale factor must be positive")
        return MixingDistribution(tuple(c * a for a in self.atoms), self.weights)

    def mass_at_most(self, s):
        return math.fsum(w for a, w in zip(self.atoms, self.weights) if a <= s)

    def mean_square(self):
        return math.fsum(w * a * a for a, w in zip(self.atoms, self.weights))

    @property
    def max_atom(self):
        return self.atoms[-1]

    def is_degenerate(self):
        """True when no positive atom carries weight (density is a point mass)."""
        return math.fsum(w for a, w in zip(self.atoms, self.weights) if a > 0.0) == 0.0

    def zero_mass(self):
        """Weight sitting on the atom at exactly 0, if any."""
        return self.weights[0] if self.atoms[0] == 0.0 else 0.0


@dataclass(frozen=True)
class LocationScaleMixture:
    """A location mu paired with a scale-mixing distribution.

    The density is E_{sigma~mixing}[(1/sigma) phi((x-mu)/sigma)]: symmetric
    about mu and, for all-positive atoms, integrating to 1.
    """

    mu: float
    mixing: MixingDistribution

    def log_density(self, x):
        return log_mixture_density(x, self.mu, self.mixing)

    def density(self, x):
        return np.exp(self.log_density(x))

    @property
    def sigma_max(self):
        return self.mixing.max_atom


def log_mixture_density(x, mu, mixing):
    """log sum_j w_j (1/sigma_j) phi((x-mu)/sigma_j) via max-shifted log-sum-exp.

    Translation invariant bit-for-bit: the only use of (x, mu) is the
    difference x - mu computed up front.  Atoms at sigma=0 contribute a point
    mass: +inf at x == mu, and are skipped (zero density) at x != mu.  If every
    atom is 0 the value at x != mu is -inf; if positive atoms exist but carry
    no weight, the density is identically void and a ValueError is raised.
    """
    scalar = np.ndim(x) == 0
    d = np.atleast_1d(np.asarray(x, dtype=float)) - float(mu)
    atoms, weights = mixing.arrays()

    zero_mass = float(weights[atoms == 0.0].sum())
    pos = (atoms > 0.0) & (weights > 0.0)
    if not np.any(pos):
        if np.all(atoms == 0.0):
            out = np.where(d == 0.0, np.inf, -np.inf)
            return float(out[0]) if scalar else out
        if np.any(d != 0.0):
            raise ValueError("degenerate density: all weight on skipped atoms")
        out = np.full(d.shape, np.inf if zero_mass > 0.0 else -np.inf)
        return float(out[0]) if scalar else out

    a = atoms[pos]
    logw = np.log(weights[pos])
    # terms[i, j] = log w_j - log a_j - log sqrt(2 pi) - d_i^2 / (2 a_j^2);
    # squared-distance overflow deliberately lands at -inf
    with np.errstate(over="ignore"):
        terms = (logw - np.log(a) - LOG_SQRT2PI) - np.square(d)[:, None] / (2.0 * a * a)
    mx = terms.max(axis=1)
    finite = mx > -np.inf
    out = np.full(d.shape, -np.inf)
    if np.any(finite):
        t = terms[finite]
        m = mx[finite]
        out[finite] = m + np.log(np.exp(t - m[:, None]).sum(axis=1))
    if zero_mass > 0.0:
        out[d == 0.0] = np.inf
    return float(out[0]) if scalar else out


def total_log_likelihood(data, mu, mixing):
    """Sum of log_mixture_density over the data; -inf propagates."""
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise ValueError("data must be nonempty")
    return float(np.sum(log_mixture_density(data, mu, mixing)))
