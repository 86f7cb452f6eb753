"""Command-line surface: estimate from a data file, run seeded experiments,
and run the verification and approximation sweeps.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

import argparse
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import chebyshev as ch
from . import simulate as sim
from . import theory
from .mixture import MixingDistribution
from .npmle import kkt_residual
from .output import atomic_write_text, write_csv
from .profile import JointFitConfig, fit_joint
from .rng import substream


class UsageError(Exception):
    pass


def _read_data_file(path):
    values = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                text = line.strip()
                if not text or text.startswith("#"):
                    continue
                try:
                    values.append(float(text))
                except ValueError:
                    raise UsageError(f"{path}: unparseable number on line {lineno}: {text!r}")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    return np.asarray(values, dtype=float)


def _cmd_estimate(args):
    data = _read_data_file(args.data)
    if data.size < 2:
        raise UsageError("need at least two observations")
    from .npmle import NpmleConfig

    config = JointFitConfig(
        mu_grid_points=args.grid_points,
        outer_tol=args.outer_tol,
        npmle=NpmleConfig(grid_points=args.grid_points, fw_tol=args.fw_tol),
        warm_start_mixing=args.warm_start,
    )
    report = fit_joint(data, config)
    mixing = report.mixing_hat
    residuals = data - report.mu_hat
    if np.all(residuals == 0.0):
        kkt = 0.0
    else:
        kkt = kkt_residual(mixing, residuals, 10 * config.npmle.grid_points)
    ll = report.outer_trace[-1][1] * data.size
    out = {
        "mu_hat": report.mu_hat,
        "atoms": list(mixing.atoms),
        "weights": list(mixing.weights),
        "log_likelihood": ll,
        "kkt_residual": kkt,
        "iterations": len(report.outer_trace),
        "converged": report.converged,
    }
    print(json.dumps(out))
    return 0


def _resolve_config_path(spec):
    if os.path.exists(spec):
        return spec
    name = spec if spec.endswith(".json") else spec + ".json"
    bundled = resources.files("hetmean").joinpath("configs", name)
    if bundled.is_file():
        return str(bundled)
    raise UsageError(f"config not found: {spec}")


def _cmd_simulate(args):
    path = _resolve_config_path(args.config)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot parse config {path}: {exc}")
    try:
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.replications is not None:
            raw["replications"] = args.replications
        config = sim.config_from_json(raw)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid config: {exc}")

    os.makedirs(args.out, exist_ok=True)
    report = sim.run_experiment(config, workers=args.workers)
    sim.write_report_csv(report, os.path.join(args.out, "report.csv"))
    sim.render_error_plot_svg(report, os.path.join(args.out, "report.svg"))
    atomic_write_text(os.path.join(args.out, "config.resolved.json"),
                      json.dumps(sim.config_to_json(config), indent=2) + "\n")
    if report.failure_log:
        for name, n, r, msg in report.failure_log:
            print(f"failure: estimator={name} n={n} replication={r}: {msg}", file=sys.stderr)
    print(os.path.join(args.out, "report.csv"))
    return 0


def _two_atom_instances(count, seed):
    rng = substream(seed, 0xC0FFEE)
    out = []
    for _ in range(count):
        mu1, mu2 = rng.uniform(-3.0, 3.0, size=2)
        a1 = float(np.exp(rng.uniform(np.log(0.3), np.log(30.0))))
        a2 = float(np.exp(rng.uniform(np.log(0.3), np.log(30.0))))
        w = float(rng.uniform(0.05, 0.95))
        g1 = MixingDistribution((min(a1, a2), max(a1, a2)), (w, 1.0 - w))
        b1 = float(np.exp(rng.uniform(np.log(0.3), np.log(30.0))))
        g2 = MixingDistribution.point(b1)
        out.append((float(mu1), g1, float(mu2), g2))
    return out


def _cmd_verify(args):
    rows = []

    for gap in (0.1, 1.0, 4.0):
        for sig in (1.0, 30.0):
            m1 = theory.LocationScaleMixture(0.0, MixingDistribution.point(sig))
            m2 = theory.LocationScaleMixture(gap, MixingDistribution.point(sig))
            got = theory.hellinger_sq(m1, m2).value
            want = 2.0 - 2.0 * math.exp(-gap * gap / (8.0 * sig * sig))
            margin = 1e-7 - abs(got - want)
            rows.append(("hellinger_closed_form", f"gap={gap};sigma={sig}",
                         got, want, margin, margin >= 0.0))

    for idx, (mu1, g1, mu2, g2) in enumerate(_two_atom_instances(args.instances, args.seed)):
        res = theory.check_symmetrization(mu1, g1, mu2, g2)
        rows.append(("symmetrization", f"instance={idx}", res.lhs, res.rhs,
                     res.lhs - res.rhs, res.holds))

    for idx, (mu1, g1, _mu2, _g2) in enumerate(_two_atom_instances(max(args.instances // 4, 5),
                                                                   args.seed + 1)):
        mu = abs(mu1)
        for delta in (0.5, 2.0, math.inf):
            num, den = theory.variational_lb_terms(mu, g1, delta)
            lhs = 0.0 if den == 0.0 else num * num / den
            h = theory.hellinger_sq(theory.LocationScaleMixture(mu, g1),
                                    theory.LocationScaleMixture(0.0, g1))
            rhs = 2.0 * h.value + 2.0 * h.abs_error_estimate + 1e-12
            rows.append(("variational_bound", f"instance={idx};delta={delta}",
                         lhs, rhs, rhs - lhs, lhs <= rhs))

    rng = substream(args.seed, 0xFEED)
    for idx in range(args.priors):
        p = (0.01, 0.1, 0.5)[idx % 3]
        big = float(np.exp(rng.uniform(np.log(5.0), np.log(1000.0))))
        g = MixingDistribution((1.0, big), (p, 1.0 - p))
        split = p ** (4.0 / 3.0)
        t_grid = sorted({min(0.3 * split, p / args.gate), min(0.9 * split, p / args.gate),
                         min(1.5 * split, 0.9 * p), 0.5 * p})
        table = theory.check_functional_inequality(g, p, t_grid,
                                                   c_bound=args.functional_c,
                                                   c_gate=args.gate)
        for row in table:
            if not row.in_range:
                continue
            rows.append(("functional_inequality", f"prior={idx};p={p};t={row.t:g}",
                         row.omega, row.bound, row.bound - row.omega, row.holds))

    os.makedirs(args.out, exist_ok=True)
    write_csv(os.path.join(args.out, "verify.csv"),
              ("check", "instance_id", "lhs", "rhs", "margin", "holds"), rows)
    failing = [r for r in rows if not r[5]]
    for r in failing:
        print(f"FAIL {r[0]} {r[1]}: lhs={r[2]!r} rhs={r[3]!r}", file=sys.stderr)
    print(os.path.join(args.out, "verify.csv"))
    return 1 if failing else 0


def _cmd_chebyshev(args):
    rows = []
    ok = True
    for lam in args.lambdas:
        for k in args.ks:
            for eps in args.epsilons:
                found = ch.minimal_degree(k, lam, eps)
                pred = ch.predicted_degree(lam, eps)
                approx = ch.chebyshev_coefficients(k, lam, found)
                measured = ch.truncation_sup_error(approx)
                bound = ch.bernstein_bound(lam, found)
                rows.append((float(k), float(lam), float(eps), found, pred,
                             float(bound), float(measured)))
                if measured > bound or found > pred:
                    ok = False
    os.makedirs(args.out, exist_ok=True)
    write_csv(os.path.join(args.out, "chebyshev.csv"),
              ("K", "lambda", "epsilon", "L_found", "L_pred", "bernstein_bound",
               "measured_error"), rows)
    print(os.path.join(args.out, "chebyshev.csv"))
    return 0 if ok else 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hetmean",
        description="Empirical-Bayes profile MLE for heteroskedastic Gaussian means, "
                    "plus simulation and verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate the location from a data file")
    p_est.add_argument("data", help="text file, one number per line ('#' comments allowed)")
    p_est.add_argument("--grid-points", type=int, default=5000,
                       help="grid size for both the scale search and the location search")
    p_est.add_argument("--fw-tol", type=float, default=1e-8,
                       help="relative stopping tolerance of the mixing-distribution fit")
    p_est.add_argument("--outer-tol", type=float, default=1e-8,
                       help="relative stopping tolerance of the outer alternation")
    p_est.add_argument("--warm-start", action="store_true",
                       help="carry the fitted mixing distribution across outer rounds")

    p_sim = sub.add_parser("simulate", help="run a seeded experiment from a JSON config")
    p_sim.add_argument("--config", required=True,
                       help="path or bundled name (e.g. sos_sqrt_n)")
    p_sim.add_argument("--out", default="out")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--replications", type=int, default=None)
    p_sim.add_argument("--workers", type=int, default=1)

    p_ver = sub.add_parser("verify", help="numerical checks of the distance inequalities")
    p_ver.add_argument("--out", default="out")
    p_ver.add_argument("--seed", type=int, default=20240801)
    p_ver.add_argument("--instances", type=int, default=40)
    p_ver.add_argument("--priors", type=int, default=6)
    p_ver.add_argument("--functional-c", type=float, default=100.0)
    p_ver.add_argument("--gate", type=float, default=10.0)

    p_ch = sub.add_parser("chebyshev", help="degree sweeps for the truncation engine")
    p_ch.add_argument("--out", default="out")
    p_ch.add_argument("--lambdas", type=float, nargs="+", default=[1.0, 5.0, 20.0])
    p_ch.add_argument("--ks", type=float, nargs="+", default=[1.0, 1000.0])
    p_ch.add_argument("--epsilons", type=float, nargs="+", default=[1e-4, 1e-6])

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "estimate": _cmd_estimate,
        "simulate": _cmd_simulate,
        "verify": _cmd_verify,
        "chebyshev": _cmd_chebyshev,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
