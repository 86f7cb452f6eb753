"""Seeded Monte Carlo harness: sample scales from a prior spec, sample
observations, run the selected estimators on identical data, and aggregate
absolute errors.

Every (n, replication) pair gets its own counter-based substream derived from
the experiment seed, so reports are bit-reproducible and any single
replication can be regenerated in isolation.  Estimator failures are recorded
and excluded from aggregates with a counted flag, never silently dropped.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .baselines import IterTruncConfig, iterative_truncation, known_prior_mle, \
    oracle_linear, sample_median
from .mixture import MixingDistribution
from .output import render_error_plot_svg, write_csv
from .profile import JointFitConfig, fit_joint
from .rng import standard_normals, substream

ESTIMATOR_NAMES = ("eb", "median", "iter_trunc", "oracle_linear", "known_prior_mle")


@dataclass(frozen=True)
class SubsetOfSignalsPrior:
    """(m/n) Unif([sigma_lo, 1]) + ((n-m)/n) Unif([1, sigma_hi]) with a fixed
    signal count: exactly m scales are drawn from the low block."""

    sigma_lo: float = 0.7
    sigma_hi: float = 150.0
    m_exponent: float | None = None
    m_count: int | None = None

    def __post_init__(self):
        if (self.m_exponent is None) == (self.m_count is None):
            raise ValueError("exactly one of m_exponent / m_count is required")
        if not 0.0 <= self.sigma_lo <= 1.0 <= self.sigma_hi:
            raise ValueError("need 0 <= sigma_lo <= 1 <= sigma_hi")

    def signal_count(self, n):
        m = self.m_count if self.m_count is not None else math.floor(n ** self.m_exponent)
        if m > n:
            raise ValueError("signal count m exceeds n")
        return int(m)


@dataclass(frozen=True)
class PointMixturePrior:
    components: tuple  # ((weight, sigma), ...)

    def __post_init__(self):
        comps = tuple((float(w), float(s)) for w, s in self.components)
        if not comps:
            raise ValueError("point mixture needs at least one component")
        if any(w < 0.0 or s < 0.0 for w, s in comps):
            raise ValueError("weights and sigmas must be >= 0")
        if abs(math.fsum(w for w, _ in comps) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "components", comps)

    def mixing(self):
        return MixingDistribution(tuple(s for _, s in self.components),
                                  tuple(w for w, _ in self.components))


@dataclass(frozen=True)
class EqualVariancePrior:
    sigma: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class QuadraticVariancePrior:
    """sigma_i = scale * i for i = 1..n."""

    scale: float

    def __post_init__(self):
        if self.scale < 0.0:
            raise ValueError("scale must be >= 0")


def sample_sigmas(prior, n, rng):
    """Draw the n scales for one replication; deterministic priors ignore rng."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(prior, SubsetOfSignalsPrior):
        m = prior.signal_count(n)
        low = prior.sigma_lo + (1.0 - prior.sigma_lo) * rng.random(m)
        high = 1.0 + (prior.sigma_hi - 1.0) * rng.random(n - m)
        sig = np.concatenate([low, high])
        return sig[rng.permutation(n)]
    if isinstance(prior, PointMixturePrior):
        w = np.array([w for w, _ in prior.components])
        s = np.array([s for _, s in prior.components])
        edges = np.cumsum(w)
        idx = np.searchsorted(edges, rng.random(n), side="right")
        return s[np.minimum(idx, s.size - 1)]
    if isinstance(prior, EqualVariancePrior):
        return np.full(n, float(prior.sigma))
    if isinstance(prior, QuadraticVariancePrior):
        return prior.scale * np.arange(1, n + 1, dtype=float)
    raise TypeError(f"unknown prior spec: {type(prior).__name__}")


def prior_mixing(prior):
    """The prior as a discrete mixing distribution, for the known-prior MLE.

    Continuous priors (subset-of-signals) and the n-atom quadratic prior have
    no tractable discrete form here and raise.
    """
    if isinstance(prior, PointMixturePrior):
        return prior.mixing()
    if isinstance(prior, EqualVariancePrior):
        return MixingDistribution.point(prior.sigma)
    raise ValueError("known_prior_mle needs a discrete prior (point mixture or equal variance)")


@dataclass(frozen=True)
class EstimatorConfigs:
    eb: JointFitConfig = field(default_factory=JointFitConfig)
    iter_trunc: IterTruncConfig = field(default_factory=lambda: IterTruncConfig(mu0=1.0, radius=10.0))
    known_prior_grid_points: int = 5000


@dataclass(frozen=True)
class ExperimentConfig:
    true_mu: float
    prior: object
    n_grid: tuple
    replications: int
    seed: int
    estimators: tuple
    estimator_configs: EstimatorConfigs = field(default_factory=EstimatorConfigs)

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])) or not self.n_grid:
            raise ValueError("n_grid must be nonempty and strictly increasing")
        for name in self.estimators:
            if name not in ESTIMATOR_NAMES:
                raise ValueError(f"unknown estimator {name!r}")


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    estimators: tuple
    # (estimator, n) -> (mean_abs_error, std_abs_error, replications_used, failures)
    _cells: dict
    raw_errors: dict      # (estimator, n) -> tuple of abs errors in replication order
    failure_log: tuple    # (estimator, n, replication, message)

    def rows(self):
        return self._cells

    def mean_abs_error(self, estimator, n):
        return self._cells[(estimator, n)][0]


def _run_replication(config, n, r):
    rng = substream(config.seed, n, r)
    sigmas = sample_sigmas(config.prior, n, rng)
    x = config.true_mu + sigmas * standard_normals(rng, n)
    cfgs = config.estimator_configs
    out = {}
    for name in config.estimators:
        try:
            if name == "eb":
                est = fit_joint(x, cfgs.eb).mu_hat
            elif name == "median":
                est = sample_median(x)
            elif name == "iter_trunc":
                est = iterative_truncation(x, cfgs.iter_trunc)
            elif name == "oracle_linear":
                est = oracle_linear(x, sigmas)
            else:
                est = known_prior_mle(x, prior_mixing(config.prior),
                                      cfgs.known_prior_grid_points)
            out[name] = ("ok", abs(est - config.true_mu))
        except ValueError as exc:
            out[name] = ("failed", str(exc))
    return out


def run_experiment(config, workers=1):
    """Run every (n, replication) cell and aggregate absolute errors.

    Fully deterministic given the config seed: replications use independent
    substreams and aggregation always happens in replication order with
    compensated summation, so worker count never changes the report.
    """
    jobs = [(n, r) for n in config.n_grid for r in range(config.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_replication, [config] * len(jobs),
                                    [n for n, _ in jobs], [r for _, r in jobs],
                                    chunksize=1))
    else:
        results = [_run_replication(config, n, r) for n, r in jobs]

    by_cell = {}
    failures = []
    for (n, r), res in zip(jobs, results):
        for name, (status, payload) in res.items():
            if status == "ok":
                by_cell.setdefault((name, n), []).append((r, payload))
            else:
                failures.append((name, n, r, payload))

    cells = {}
    raw = {}
    for name in config.estimators:
        for n in config.n_grid:
            entries = sorted(by_cell.get((name, n), []))
            errs = [e for _, e in entries]
            nfail = sum(1 for f in failures if f[0] == name and f[1] == n)
            if errs:
                mean = math.fsum(errs) / len(errs)
                if len(errs) >= 2:
                    std = math.sqrt(math.fsum((e - mean) ** 2 for e in errs) / (len(errs) - 1))
                else:
                    std = 0.0
            else:
                mean, std = math.nan, math.nan
            cells[(name, n)] = (mean, std, len(errs), nfail)
            raw[(name, n)] = tuple(errs)

    return ExperimentReport(
        config=config,
        estimators=config.estimators,
        _cells=cells,
        raw_errors=raw,
        failure_log=tuple(failures),
    )


def write_report_csv(report, path):
    """CSV schema: estimator,n,replications,mean_abs_error,std_abs_error,failures."""
    if not report.estimators:
        raise ValueError("nothing to report")
    rows = []
    for name in report.estimators:
        for n in report.config.n_grid:
            mean, std, used, nfail = report.rows()[(name, n)]
            rows.append((name, n, used, float(mean), float(std), nfail))
    write_csv(path, ("estimator", "n", "replications", "mean_abs_error",
                     "std_abs_error", "failures"), rows)


def read_report_csv(path):
    """Parse a report CSV back into {(estimator, n): (mean, std, used, failures)}."""
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        if header != ["estimator", "n", "replications", "mean_abs_error",
                      "std_abs_error", "failures"]:
            raise ValueError("unexpected report header")
        for line in f:
            est, n, used, mean, std, nfail = line.strip().split(",")
            out[(est, int(n))] = (float(mean), float(std), int(used), int(nfail))
    return out


# --- JSON config surface -------------------------------------------------

_PRIOR_KINDS = {
    "subset_of_signals": SubsetOfSignalsPrior,
    "point_mixture": PointMixturePrior,
    "equal_variance": EqualVariancePrior,
    "quadratic_variance": QuadraticVariancePrior,
}


def _check_keys(obj, allowed, where):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ValueError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _prior_from_json(obj):
    _check_keys(obj, {"kind", "sigma_lo", "sigma_hi", "m_exponent", "m_count",
                      "components", "sigma", "scale"}, "prior")
    kind = obj.get("kind")
    if kind not in _PRIOR_KINDS:
        raise ValueError(f"unknown prior kind {kind!r}")
    kwargs = {k: v for k, v in obj.items() if k != "kind"}
    if kind == "point_mixture":
        kwargs["components"] = tuple((float(w), float(s)) for w, s in kwargs["components"])
    return _PRIOR_KINDS[kind](**kwargs)


def _dataclass_from_json(cls, obj, where):
    names = {f.name for f in fields(cls)}
    _check_keys(obj, names, where)
    return cls(**obj)


def config_from_json(obj):
    _check_keys(obj, {f.name for f in fields(ExperimentConfig)}, "experiment config")
    for key in ("true_mu", "prior", "n_grid", "replications", "seed", "estimators"):
        if key not in obj:
            raise ValueError(f"missing config key {key!r}")
    prior = _prior_from_json(obj["prior"])
    est_cfg = EstimatorConfigs()
    if "estimator_configs" in obj:
        sub = dict(obj["estimator_configs"])
        _check_keys(sub, {"eb", "iter_trunc", "known_prior_grid_points"}, "estimator_configs")
        kwargs = {}
        if "eb" in sub:
            eb = dict(sub["eb"])
            npmle_cfg = None
            if "npmle" in eb:
                from .npmle import NpmleConfig
                npmle_cfg = _dataclass_from_json(NpmleConfig, eb.pop("npmle"), "npmle config")
            eb_cfg = _dataclass_from_json(JointFitConfig,
                                          eb if npmle_cfg is None else {**eb, "npmle": npmle_cfg},
                                          "eb config")
            kwargs["eb"] = eb_cfg
        if "iter_trunc" in sub:
            kwargs["iter_trunc"] = _dataclass_from_json(IterTruncConfig, sub["iter_trunc"],
                                                        "iter_trunc config")
        if "known_prior_grid_points" in sub:
            kwargs["known_prior_grid_points"] = int(sub["known_prior_grid_points"])
        est_cfg = EstimatorConfigs(**kwargs)
    return ExperimentConfig(
        true_mu=float(obj["true_mu"]),
        prior=prior,
        n_grid=tuple(obj["n_grid"]),
        replications=int(obj["replications"]),
        seed=int(obj["seed"]),
        estimators=tuple(obj["estimators"]),
        estimator_configs=est_cfg,
    )


def config_to_json(config):
    prior = config.prior
    kind = {v: k for k, v in _PRIOR_KINDS.items()}[type(prior)]
    prior_obj = {"kind": kind}
    for f in fields(prior):
        v = getattr(prior, f.name)
        if v is not None:
            prior_obj[f.name] = list(list(c) for c in v) if f.name == "components" else v
    cfgs = config.estimator_configs
    eb = {f.name: getattr(cfgs.eb, f.name) for f in fields(cfgs.eb) if f.name != "npmle"}
    eb["npmle"] = {f.name: getattr(cfgs.eb.npmle, f.name) for f in fields(cfgs.eb.npmle)}
    return {
        "true_mu": config.true_mu,
        "prior": prior_obj,
        "n_grid": list(config.n_grid),
        "replications": config.replications,
        "seed": config.seed,
        "estimators": list(config.estimators),
        "estimator_configs": {
            "eb": eb,
            "iter_trunc": {f.name: getattr(cfgs.iter_trunc, f.name)
                           for f in fields(cfgs.iter_trunc)},
            "known_prior_grid_points": cfgs.known_prior_grid_points,
        },
    }


def load_config(path):
    with open(path, "r", encoding="utf-8") as f:
        return config_from_json(json.load(f))
