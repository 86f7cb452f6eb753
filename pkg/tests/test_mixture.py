import math

import numpy as np
import pytest

from hetmean.mixture import (LocationScaleMixture, MixingDistribution,
                             log_mixture_density, total_log_likelihood)
from hetmean.quadrature import adaptive_simpson

LOG_PHI0 = -0.9189385332046727        # log(1/sqrt(2 pi))
LOG_TWO_ATOM_AT_ZERO = -1.2066206056564535  # log(0.5 phi(0) + 0.25 phi(0))
TWO_POINT_LL = -2.8378770664093453    # 2 log phi(1)


class TestMixingDistribution:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            MixingDistribution((1.0,), (0.9,))

    def test_negative_atom_rejected(self):
        with pytest.raises(ValueError):
            MixingDistribution((-1.0,), (1.0,))

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            MixingDistribution((1.0, 2.0), (1.5, -0.5))

    def test_atoms_sorted_and_duplicates_merged(self):
        g = MixingDistribution((2.0, 1.0, 2.0 * (1.0 + 1e-13)), (0.25, 0.5, 0.25))
        assert g.atoms == (1.0, 2.0)
        assert g.weights == (0.5, 0.5)

    def test_zero_atom_allowed_explicitly(self):
        g = MixingDistribution((0.0,), (1.0,))
        assert g.atoms == (0.0,)
        assert g.is_degenerate()

    def test_scaled(self):
        g = MixingDistribution((1.0, 2.0), (0.3, 0.7)).scaled(3.0)
        assert g.atoms == (3.0, 6.0)


class TestLogMixtureDensity:
    def test_standard_normal_at_origin(self):
        d1 = MixingDistribution.point(1.0)
        assert abs(log_mixture_density(0.0, 0.0, d1) - LOG_PHI0) <= 1e-14

    def test_two_atom_value(self):
        g = MixingDistribution((1.0, 2.0), (0.5, 0.5))
        assert abs(log_mixture_density(0.0, 0.0, g) - LOG_TWO_ATOM_AT_ZERO) <= 1e-13

    def test_translation_invariance_bitwise(self):
        g = MixingDistribution((0.5, 3.0, 11.0), (0.2, 0.5, 0.3))
        assert log_mixture_density(7.0, 3.0, g) == log_mixture_density(4.0, 0.0, g)
        xs = np.array([-5.0, 0.1, 42.0])
        np.testing.assert_array_equal(log_mixture_density(xs, 1.5, g),
                                      log_mixture_density(xs - 1.5, 0.0, g))

    def test_zero_atom_point_mass(self):
        g = MixingDistribution((0.0, 1.0), (0.5, 0.5))
        assert log_mixture_density(0.0, 0.0, g) == math.inf
        # at x != mu the zero atom is skipped; remaining mass is not rescaled
        got = log_mixture_density(1.0, 0.0, g)
        want = math.log(0.5) + log_mixture_density(1.0, 0.0, MixingDistribution.point(1.0))
        assert abs(got - want) <= 1e-12

    def test_all_zero_atoms(self):
        g = MixingDistribution((0.0,), (1.0,))
        assert log_mixture_density(1.0, 0.0, g) == -math.inf
        assert log_mixture_density(0.0, 0.0, g) == math.inf

    def test_all_weight_on_skipped_atoms_errors(self):
        g = MixingDistribution((0.0, 1.0), (1.0, 0.0))
        with pytest.raises(ValueError, match="degenerate density"):
            log_mixture_density(2.0, 0.0, g)

    def test_stability_no_nan(self):
        g = MixingDistribution((1e-6, 1.0, 1e6), (0.3, 0.4, 0.3))
        xs = np.array([0.0, 1e-9, 1.0, 1e3, 1e6, -1e6])
        vals = log_mixture_density(xs, 0.0, g)
        assert np.all(np.isfinite(vals))
        # the log stays finite far past the density's underflow point
        tiny = MixingDistribution.point(1e-6)
        far = log_mixture_density(1e6, 0.0, tiny)
        assert math.isfinite(far) and far < -1e20
        # only a squared-distance overflow produces the -inf signal
        assert log_mixture_density(1e200, 0.0, tiny) == -math.inf

    def test_scaling_covariance(self):
        g = MixingDistribution((0.7, 4.0), (0.6, 0.4))
        c = 37.0
        for x, mu in ((1.3, 0.2), (-5.0, 1.0), (0.0, 0.0)):
            lhs = log_mixture_density(c * x, c * mu, g.scaled(c))
            rhs = log_mixture_density(x, mu, g) - math.log(c)
            assert abs(lhs - rhs) <= 1e-10

    def test_symmetry_about_mu(self):
        g = MixingDistribution((1.0, 9.0), (0.8, 0.2))
        for a in (0.1, 2.0, 30.0):
            assert abs(log_mixture_density(1.5 + a, 1.5, g)
                       - log_mixture_density(1.5 - a, 1.5, g)) <= 1e-12

    def test_normalization_by_quadrature(self):
        g = MixingDistribution((0.5, 2.0, 10.0), (0.5, 0.3, 0.2))
        m = LocationScaleMixture(1.0, g)
        res = adaptive_simpson(m.density, 1.0 - 40.0 * m.sigma_max,
                               1.0 + 40.0 * m.sigma_max, tol=1e-9)
        assert abs(res.value - 1.0) <= 1e-6


class TestTotalLogLikelihood:
    def test_single_point(self):
        d1 = MixingDistribution.point(1.0)
        assert abs(total_log_likelihood([0.0], 0.0, d1) - LOG_PHI0) <= 1e-14

    def test_additivity(self):
        d1 = MixingDistribution.point(1.0)
        assert abs(total_log_likelihood([0.0, 0.0], 0.0, d1) - 2 * LOG_PHI0) <= 1e-13

    def test_two_points(self):
        d1 = MixingDistribution.point(1.0)
        assert abs(total_log_likelihood([1.0, -1.0], 0.0, d1) - TWO_POINT_LL) <= 1e-13

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            total_log_likelihood([], 0.0, MixingDistribution.point(1.0))

    def test_neg_inf_propagates(self):
        g = MixingDistribution.point(1e-6)
        assert total_log_likelihood([0.0, 1e200], 0.0, g) == -math.inf
