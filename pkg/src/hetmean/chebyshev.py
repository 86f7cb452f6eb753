"""Chebyshev truncation of double-exponential decay profiles and the
separable bivariate expansion built on it.

The target family is h(v) = exp(-k * exp(lam * v)) on [-1, 1].  Coefficients
come from cosine quadrature at Chebyshev points; truncation error is certified
against the analyticity bound 2/(rho-1) * rho^-L with rho = min(2, 1 + pi/(2
lam)), which is independent of k.  The separable expansion rewrites
t*exp(-t^2 x^2 / 2) over a (t, x) box in the basis {t (log t)^j (log x)^(i-j)}
by expanding the same truncation through the affine log-change of variables.
"""

import math
from dataclasses import dataclass

import numpy as np

_COEFF_AGREEMENT = 1e-12
_MAX_QUAD_NODES = 1 << 22
_DEGREE_CAP = 10_000


@dataclass(frozen=True)
class ChebyshevApprox:
    k: float
    lam: float
    degree: int
    coefficients: tuple
    quadrature_nodes: int
    coeff_error: float  # node-doubling agreement estimate


@dataclass(frozen=True)
class SeparableExpansion:
    t_range: tuple
    x_range: tuple
    degree: int
    coefficients: tuple  # row i holds the (log t)^j (log x)^(i-j) weights, j = 0..i
    sup_error: float
    expansion_roundoff: float
    cheb: ChebyshevApprox


def _h_values(k, lam, v):
    """exp(-k * exp(lam * v)) without overflow for large k * e^lam."""
    v = np.asarray(v, dtype=float)
    if k == 0.0:
        return np.ones_like(v)
    inner = np.exp(np.minimum(lam * v + math.log(k), 700.0))
    return np.exp(-inner)


def _cosine_coefficients(k, lam, degree, nodes):
    theta = (np.arange(nodes) + 0.5) * (math.pi / nodes)
    hv = _h_values(k, lam, np.cos(theta))
    c = np.empty(degree + 1)
    step = max(1, 4_000_000 // nodes)
    for j0 in range(0, degree + 1, step):
        js = np.arange(j0, min(j0 + step, degree + 1))
        c[js] = (2.0 / nodes) * (np.cos(np.outer(js, theta)) @ hv)
    c[0] *= 0.5
    return c


def chebyshev_coefficients(k, lam, degree, nodes=None):
    """Truncation coefficients of h by discrete cosine quadrature.

    With nodes=None the node count starts at 8*(degree+1) and doubles until
    two successive estimates agree to 1e-12; an explicit node count must be at
    least 4*(degree+1) and is compared against a doubled run for the error
    estimate either way.
    """
    if k < 0.0:
        raise ValueError("k must be >= 0")
    if lam < 0.0:
        raise ValueError("lam must be >= 0")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if nodes is not None:
        if nodes < 4 * (degree + 1):
            raise ValueError("insufficient nodes: need at least 4*(degree+1)")
        c = _cosine_coefficients(k, lam, degree, nodes)
        c2 = _cosine_coefficients(k, lam, degree, 2 * nodes)
        return ChebyshevApprox(k, lam, degree, tuple(c), nodes,
                               float(np.max(np.abs(c - c2))))

    n = 8 * (degree + 1)
    c = _cosine_coefficients(k, lam, degree, n)
    while True:
        n2 = 2 * n
        c2 = _cosine_coefficients(k, lam, degree, n2)
        diff = float(np.max(np.abs(c - c2)))
        if diff <= _COEFF_AGREEMENT or n2 >= _MAX_QUAD_NODES:
            return ChebyshevApprox(k, lam, degree, tuple(c2), n2, diff)
        n, c = n2, c2


def evaluate_truncation(approx, v):
    """Sum of c_j T_j(v) by the three-term recurrence."""
    v = np.asarray(v, dtype=float)
    c = approx.coefficients
    acc = np.full_like(v, c[0])
    if approx.degree == 0:
        return acc
    t_prev = np.ones_like(v)
    t_cur = v.copy()
    acc = acc + c[1] * t_cur
    for j in range(2, approx.degree + 1):
        t_prev, t_cur = t_cur, 2.0 * v * t_cur - t_prev
        acc = acc + c[j] * t_cur
    return acc


def truncation_sup_error(approx, probe_points=2000):
    """Max |h - truncation| over a Chebyshev-spaced probe grid."""
    if probe_points < 1000:
        raise ValueError("probe_points must be >= 1000")
    v = np.cos(np.linspace(0.0, math.pi, probe_points))
    return float(np.max(np.abs(_h_values(approx.k, approx.lam, v)
                               - evaluate_truncation(approx, v))))


def bernstein_bound(lam, degree):
    """Certified truncation bound 2/(rho-1) * rho^-L, rho = min(2, 1+pi/(2 lam)).

    The profile h is bounded by 1 on the ellipse of parameter rho for every
    k >= 0, which is what makes the bound independent of k.
    """
    rho = 2.0 if lam <= 0.0 else min(2.0, 1.0 + math.pi / (2.0 * lam))
    return 2.0 / (rho - 1.0) * rho ** (-degree)


def predicted_degree(lam, epsilon, c_degree=10.0):
    """Audited ceiling for the minimal degree at tolerance epsilon."""
    lam_eff = max(lam, 1.0)
    scale = max(lam, math.e)
    return math.ceil(c_degree * (math.log(1.0 / epsilon) + lam_eff * math.log(scale / epsilon)))


def minimal_degree(k, lam, epsilon, probe_points=2000):
    """Smallest degree whose measured sup error is <= epsilon.

    Found by doubling then bisection on the measured error; raises once the
    search passes the 10,000-degree cap.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    cache = {}

    def err(degree):
        if degree not in cache:
            approx = chebyshev_coefficients(k, lam, degree)
            cache[degree] = truncation_sup_error(approx, probe_points)
        return cache[degree]

    if err(0) <= epsilon:
        return 0
    hi = 1
    while err(hi) > epsilon:
        hi *= 2
        if hi > _DEGREE_CAP:
            raise ValueError("degree cap exceeded")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if err(mid) <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def _monomial_from_chebyshev(coefficients):
    """Monomial coefficients of sum c_j T_j(v)."""
    degree = len(coefficients) - 1
    p = np.zeros(degree + 1)
    t_prev = np.zeros(degree + 1)
    t_cur = np.zeros(degree + 1)
    t_prev[0] = 1.0
    p += coefficients[0] * t_prev
    if degree == 0:
        return p
    t_cur[1] = 1.0
    p += coefficients[1] * t_cur
    for j in range(2, degree + 1):
        t_next = np.zeros(degree + 1)
        t_next[1:] = 2.0 * t_cur[:-1]
        t_next -= t_prev
        p += coefficients[j] * t_next
        t_prev, t_cur = t_cur, t_next
    return p


def separable_expansion(t_range, x_range, degree):
    """Bivariate expansion of t * exp(-t^2 x^2 / 2) over a (t, x) box.

    Builds the double-exponential truncation at the box's induced (k, lam),
    pushes it through the affine map of u = log t + log x, and expands the
    powers of u binomially.  The returned sup error is measured directly on a
    200 x 200 log-spaced grid; expansion_roundoff is the largest disagreement
    between the expanded form and the unexpanded truncation on that grid.
    """
    t_min, t_max = (float(t_range[0]), float(t_range[1]))
    x_min, x_max = (float(x_range[0]), float(x_range[1]))
    if not (0.0 < t_min <= t_max and 0.0 < x_min <= x_max):
        raise ValueError("ranges must satisfy 0 < min <= max")
    u_min = math.log(t_min * x_min)
    u_max = math.log(t_max * x_max)
    k = 0.5 * t_min * t_max * x_min * x_max
    lam = u_max - u_min

    cheb = chebyshev_coefficients(k, lam, degree)
    p = _monomial_from_chebyshev(np.asarray(cheb.coefficients))

    if lam == 0.0:
        # Degenerate box: u takes a single value, so the truncation reduces to
        # its constant value at v = 0.
        p_tilde = np.zeros(degree + 1)
        p_tilde[0] = _eval_monomial(p, 0.0)
        a_lin, b_lin = 0.0, 0.0
    else:
        a_lin = 2.0 / lam
        b_lin = -(u_min + u_max) / lam
        p_tilde = np.zeros(degree + 1)
        # overflow of extreme-degree terms is tolerated here and rejected with
        # a clear error when the bivariate coefficients are assembled
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(degree + 1):
                if p[i] == 0.0:
                    continue
                for m in range(i + 1):
                    try:
                        p_tilde[m] += (p[i] * float(math.comb(i, m))
                                       * a_lin ** m * b_lin ** (i - m))
                    except OverflowError:
                        p_tilde[m] = math.inf

    rows = []
    for i in range(degree + 1):
        row = []
        for j in range(i + 1):
            try:
                coef = float(p_tilde[i]) * float(math.comb(i, j))
            except OverflowError:
                coef = math.inf
            if not math.isfinite(coef):
                raise ValueError(f"coefficient overflow in binomial expansion at degree {i}")
            row.append(coef)
        rows.append(tuple(row))

    ts = np.geomspace(t_min, t_max, 200)
    xs = np.geomspace(x_min, x_max, 200)
    lt = np.log(ts)
    lx = np.log(xs)
    series = np.zeros((ts.size, xs.size))
    lt_pows = np.vander(lt, degree + 1, increasing=True)
    lx_pows = np.vander(lx, degree + 1, increasing=True)
    for i in range(degree + 1):
        for j in range(i + 1):
            c = rows[i][j]
            if c != 0.0:
                series += c * np.outer(lt_pows[:, j], lx_pows[:, i - j])
    expanded = ts[:, None] * series

    u = lt[:, None] + lx[None, :]
    v = a_lin * u + b_lin if lam > 0.0 else np.zeros_like(u)
    unexpanded = ts[:, None] * evaluate_truncation(cheb, v)
    target = ts[:, None] * np.exp(-0.5 * np.square(ts[:, None] * xs[None, :]))

    return SeparableExpansion(
        t_range=(t_min, t_max),
        x_range=(x_min, x_max),
        degree=degree,
        coefficients=tuple(rows),
        sup_error=float(np.max(np.abs(target - expanded))),
        expansion_roundoff=float(np.max(np.abs(expanded - unexpanded))),
        cheb=cheb,
    )


def _eval_monomial(p, v):
    acc = 0.0
    for c in reversed(p):
        acc = acc * v + c
    return float(acc)
