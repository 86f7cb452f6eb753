import itertools
import math

import numpy as np
import pytest

from hetmean.mixture import MixingDistribution, log_mixture_density
from hetmean.npmle import (NpmleConfig, find_best_atom, fit_npmle, kkt_score,
                           optimize_weights)
from hetmean.rng import standard_normals, substream

SQRT2PI = math.sqrt(2.0 * math.pi)

FAST = NpmleConfig(grid_points=2000, fw_tol=1e-6)


def direct_kkt(mixing, sigma, residuals):
    """Probability-space oracle for the gradient score (no log tricks)."""
    r = np.asarray(residuals, dtype=float)
    a = np.array(mixing.atoms)
    w = np.array(mixing.weights)
    f = (w / (SQRT2PI * a) * np.exp(-r[:, None] ** 2 / (2 * a * a))).sum(axis=1)
    num = np.exp(-r ** 2 / (2 * sigma * sigma)) / (SQRT2PI * sigma)
    return float(np.mean(num / f))


class TestKktScore:
    def test_single_atom_mle_scores_one(self):
        rng = substream(1, 0)
        r = 2.0 * standard_normals(rng, 200)
        sigma_hat = math.sqrt(float(np.mean(np.square(r))))
        g = MixingDistribution.point(sigma_hat)
        assert abs(kkt_score(g, sigma_hat, r) - 1.0) <= 1e-12

    def test_two_point_value_against_direct_formula(self):
        g = MixingDistribution.point(1.0)
        got = kkt_score(g, 2.0, [1.0, -1.0])
        assert abs(got - 0.7274957073091007) <= 1e-12
        assert abs(got - direct_kkt(g, 2.0, [1.0, -1.0])) <= 1e-12

    def test_support_violation(self):
        g = MixingDistribution.point(1e-3)
        with pytest.raises(ValueError, match="support violation"):
            kkt_score(g, 1.0, [1e200])

    def test_sigma_positive(self):
        with pytest.raises(ValueError):
            kkt_score(MixingDistribution.point(1.0), 0.0, [1.0])


class TestFindBestAtom:
    def test_brute_force_oracle(self):
        rng = substream(2, 0)
        r = 2.0 * standard_normals(rng, 60)
        g = MixingDistribution.point(100.0)
        grid_points = 50_000
        got = find_best_atom(g, r, grid_points)

        # independent probability-space scan of the same geometric grid
        absr = np.abs(r)
        grid = np.geomspace(absr[absr > 0].min(), absr.max(), grid_points)
        a = np.array(g.atoms)
        w = np.array(g.weights)
        f = (w / (SQRT2PI * a) * np.exp(-r[:, None] ** 2 / (2 * a * a))).sum(axis=1)
        best_score, best_sigma = -np.inf, None
        for k in range(0, grid_points, 5000):
            s = grid[k:k + 5000]
            sc = (np.exp(-r[:, None] ** 2 / (2 * s * s)) / (SQRT2PI * s) / f[:, None]).mean(axis=0)
            j = int(np.argmax(sc))
            if sc[j] > best_score:
                best_score, best_sigma = float(sc[j]), float(s[j])
        assert got == best_sigma or direct_kkt(g, got, r) >= best_score - 1e-12

    def test_far_prior_pulls_to_data_scale(self):
        g = MixingDistribution.point(100.0)
        got = find_best_atom(g, [-2.0, 2.0], 5000)
        assert got == 2.0  # bracket collapses to [2, 2]

    def test_optimal_single_atom_scores_at_most_one(self):
        g = MixingDistribution.point(1.0)
        atom = find_best_atom(g, [-1.0, 1.0], 5000)
        assert kkt_score(g, atom, [-1.0, 1.0]) <= 1.0 + 1e-9

    def test_collapsed_bracket(self):
        g = MixingDistribution.point(5.0)
        assert find_best_atom(g, [1.0, 1.0, 1.0], 1000) == 1.0

    def test_all_zero_residuals(self):
        with pytest.raises(ValueError, match="degenerate data"):
            find_best_atom(MixingDistribution.point(1.0), [0.0, 0.0], 100)


class TestOptimizeWeights:
    def test_single_atom(self):
        g = optimize_weights([2.0], [1.0, -1.0])
        assert g.atoms == (2.0,)
        assert g.weights == (1.0,)

    def test_two_scale_consistency_and_grid_oracle(self):
        rng = substream(3, 0)
        z = standard_normals(rng, 2000)
        scales = np.where(np.arange(2000) % 2 == 0, 1.0, 10.0)
        r = scales * z
        g = optimize_weights([1.0, 10.0], r)
        w1 = g.weights[0]
        assert abs(w1 - 0.5) <= 0.05

        # oracle: dense scan of the 1-simplex
        a = np.array([1.0, 10.0])
        k = np.exp(-r[:, None] ** 2 / (2 * a * a)) / (SQRT2PI * a)
        ws = np.linspace(1e-6, 1.0 - 1e-6, 2001)
        ll = np.log(np.outer(k[:, 0], ws) + np.outer(k[:, 1], 1.0 - ws)).mean(axis=0)
        w_oracle = ws[int(np.argmax(ll))]
        assert abs(w1 - w_oracle) <= 2e-3

    def test_warm_start_fixed_point(self):
        rng = substream(3, 1)
        r = np.concatenate([standard_normals(rng, 300), 5.0 * standard_normals(rng, 300)])
        g = optimize_weights([1.0, 5.0], r)
        g2 = optimize_weights([1.0, 5.0], r, warm_start=list(g.weights))

        def avg_ll(mix):
            return float(np.mean(log_mixture_density(r, 0.0, mix)))

        assert avg_ll(g2) >= avg_ll(g) - 1e-10

    def test_empty_support(self):
        with pytest.raises(ValueError):
            optimize_weights([], [1.0])

    def test_duplicate_support_rejected(self):
        with pytest.raises(ValueError):
            optimize_weights([1.0, 1.0], [1.0, -1.0])


def em_weight_solve(k, tol=1e-13, iters=50000):
    """Reference EM on a fixed kernel matrix, used by the exhaustive oracle."""
    m = k.shape[1]
    w = np.full(m, 1.0 / m)
    ll = -np.inf
    for _ in range(iters):
        f = k @ w
        w = w * (k / f[:, None]).mean(axis=0)
        w = w / w.sum()
        ll_new = float(np.mean(np.log(k @ w)))
        if ll_new - ll < tol:
            break
        ll = ll_new
    return w, float(np.mean(np.log(k @ w)))


class TestFitNpmle:
    def test_normal_data_concentrates(self):
        rng = substream(42, 5000, 0)
        r = 3.0 * standard_normals(rng, 5000)
        rep = fit_npmle(r, FAST)
        assert abs(rep.mixing.mean_square() - 9.0) <= 0.9

    def test_two_point_support_interval(self):
        rep = fit_npmle([-1.0, 1.0])
        assert rep.mixing.atoms == (1.0,)
        assert rep.mixing.weights == (1.0,)

    def test_kkt_residual_small_on_well_conditioned_input(self):
        rng = substream(5, 1000, 0)
        r = 3.0 * standard_normals(rng, 1000)
        rep = fit_npmle(r)  # library defaults
        assert rep.kkt_residual <= 1e-3

    def test_trace_monotone_and_structural_bounds(self):
        rng = substream(6, 0)
        scales = np.where(substream(6, 1).random(400) < 0.1, 1.0, 20.0)
        r = scales * standard_normals(rng, 400)
        rep = fit_npmle(r, FAST)
        trace = np.array(rep.log_likelihood_trace)
        assert np.all(np.diff(trace) >= -1e-10)
        absr = np.abs(r)
        lo, hi = absr[absr > 0].min(), absr.max()
        atoms = np.array(rep.mixing.atoms)
        assert np.all(atoms >= lo * (1 - 1e-12))
        assert np.all(atoms <= hi * (1 + 1e-12))
        assert len(atoms) <= np.unique(absr).size

    def test_degenerate_data(self):
        with pytest.raises(ValueError, match="degenerate data"):
            fit_npmle([0.0, 0.0, 0.0])

    def test_tiny_instance_matches_exhaustive_oracle(self):
        residuals = [0.6, -1.1, 1.9]
        rep = fit_npmle(residuals, NpmleConfig(grid_points=3000))
        fitted_ll = rep.log_likelihood_trace[-1]

        r = np.asarray(residuals)
        absr = np.abs(r)

        def ll_of_support(atoms, tol=1e-13, iters=50000):
            a = np.asarray(atoms, dtype=float)
            k = np.exp(-r[:, None] ** 2 / (2 * a * a)) / (SQRT2PI * a)
            return em_weight_solve(k, tol, iters)[1]

        # stage 1: coarse exhaustive search over supports from a small grid
        coarse = np.geomspace(absr.min(), absr.max(), 24)
        best_ll, best_support = -np.inf, None
        for size in (1, 2, 3):
            for support in itertools.combinations(coarse, size):
                ll = ll_of_support(support, tol=1e-10, iters=3000)
                if ll > best_ll:
                    best_ll, best_support = ll, list(support)

        # stage 2: shrinking-step coordinate search on the atom positions
        best_ll = ll_of_support(best_support)
        span = coarse[1] / coarse[0]
        for _ in range(9):
            span = math.sqrt(span)
            improved = True
            while improved:
                improved = False
                for i in range(len(best_support)):
                    for cand in (best_support[i] / span, best_support[i] * span):
                        trial = list(best_support)
                        trial[i] = cand
                        if len(set(trial)) < len(trial):
                            continue
                        ll = ll_of_support(trial)
                        if ll > best_ll + 1e-13:
                            best_ll, best_support = ll, trial
                            improved = True

        assert abs(fitted_ll - best_ll) <= 1e-6
