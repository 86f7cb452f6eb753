import math

import numpy as np
import pytest

from hetmean.gauss import normal_quantile, standard_normal_cdf

# High-precision reference for Phi(1), frozen from adaptive quadrature of the
# standard normal density (independent of the erfc-backed implementation).
PHI_ONE = 0.841344746068543


def test_cdf_at_zero():
    assert standard_normal_cdf(0.0) == 0.5


def test_cdf_tail_limit():
    assert abs(standard_normal_cdf(8.0) - 1.0) <= 1e-12


def test_cdf_against_quadrature_reference():
    assert abs(standard_normal_cdf(1.0) - PHI_ONE) <= 1e-12


def test_cdf_symmetry_exact():
    for x in np.concatenate([np.linspace(0.0, 6.0, 97), [37.0, 1e-8]]):
        assert standard_normal_cdf(x) + standard_normal_cdf(-x) == 1.0


def test_cdf_array_matches_scalar():
    xs = np.array([-2.5, -0.3, 0.0, 1.7, 9.0])
    vec = standard_normal_cdf(xs)
    assert vec.shape == xs.shape
    for x, v in zip(xs, vec):
        assert v == standard_normal_cdf(float(x))


def test_quantile_round_trip():
    ps = np.geomspace(1e-12, 0.5, 60)
    ps = np.concatenate([ps, 1.0 - ps])
    xs = normal_quantile(ps)
    back = standard_normal_cdf(xs)
    assert np.all(np.abs(back - ps) <= 1e-13 + 1e-11 * ps)


def test_quantile_endpoints_and_domain():
    assert normal_quantile(0.0) == -math.inf
    assert normal_quantile(1.0) == math.inf
    assert normal_quantile(0.5) == 0.0
    with pytest.raises(ValueError):
        normal_quantile(-0.1)
    with pytest.raises(ValueError):
        normal_quantile(1.1)
