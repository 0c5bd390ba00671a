"""Independent numerical oracles shared by the test modules."""

import itertools
import math
import warnings

import numpy as np
from scipy import integrate

from corrqcd.qcd import DEGENERATE_SCORE
from corrqcd.vdensity import pdf_v, t_integral, w_transform


def t_quadrature(rho, n):
    """T(rho) by adaptive Gauss-Kronrod with the (1 - u)^alpha endpoint factor as a weight."""
    alpha = (n - 4) / 2.0
    if rho >= 1.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(
            lambda u: (1.0 + u) ** alpha, rho, 1.0, weight="alg", wvar=(0.0, alpha), epsabs=1e-15, epsrel=1e-14
        )
    return val


def _breakpoints(params, J):
    # quantiles of W ~ Exp(J) mapped back to rho bracket where the mass sits
    from corrqcd.vdensity import v_from_w

    qs = np.array([1e-12, 1e-6, 1e-3, 0.05, 0.3, 0.7, 0.95, 0.999, 1 - 1e-6, 1 - 1e-12])
    w = -np.log1p(-qs) / J
    w = w[w < params.w_max]
    return sorted(set(float(x) for x in np.atleast_1d(v_from_w(w, params)) if 0 < x < 1))


def _integrate_in_s(h, params, J):
    # rho = 1 - s^2 regularizes the (1 - rho^2)^((n-4)/2) endpoint factor for every n.
    # 1 - s^2 is rounded, so the Jacobian uses the s that the rounded rho actually
    # corresponds to; the integrand is smooth in s, so the shift is harmless.
    # Below s_min, rho rounds to 1 and the integrand is held at s_min.
    s_min = math.sqrt(1.0 - float(np.nextafter(1.0, 0.0)))

    def g(s):
        r = 1.0 - max(s, s_min) ** 2
        return 2.0 * math.sqrt(1.0 - r) * h(r)

    s_pts = sorted({0.0, 1.0, *(math.sqrt(1.0 - r) for r in _breakpoints(params, J))})
    total = 0.0
    for a, b in zip(s_pts[:-1], s_pts[1:]):
        with warnings.catch_warnings():
            # tolerances sit at the roundoff floor; quad reports that, not a failure
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(g, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)
        total += val
    return total


def density_mass(params, J=1.0):
    """Integral of f_V(.; J) over (0, 1] by adaptive quadrature."""
    return _integrate_in_s(lambda r: float(pdf_v(r, params, J)), params, J)


def kl_quadrature(params, J):
    """KL(f_V(.; J) || f_V(.; 1)) by quadrature of f_J * log(f_J / f_1) over (0, 1]."""
    log_ratio = lambda r: math.log(J) - (J - 1.0) * float(w_transform(r, params))
    return _integrate_in_s(lambda r: float(pdf_v(r, params, J)) * log_ratio(r), params, J)


def pearson(x, y):
    # textbook formula, deliberately independent of the library path
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / (sxx * syy) ** 0.5


def pair_scan_v(block):
    n, p = block.shape
    cols = [list(block[:, j]) for j in range(p)]
    return max(abs(pearson(cols[i], cols[j])) for i, j in itertools.combinations(range(p), 2))


def full_sort_v(block, k):
    n, p = block.shape
    cols = [list(block[:, j]) for j in range(p)]
    best = 0.0
    for i in range(p):
        mags = sorted((abs(pearson(cols[i], cols[j])) for j in range(p) if j != i), reverse=True)
        best = max(best, mags[k - 1])
    return best


def sup_llr(seg, epsilon, two_sided=False):
    # sup over admissible J of sum(log J - (J - 1) w); the objective is concave in J,
    # so the supremum over a half-line sits at the unconstrained optimum or the boundary
    m, s = len(seg), math.fsum(seg)
    if s == 0:
        return DEGENERATE_SCORE

    def llr(j):
        return m * math.log(j) - (j - 1) * s

    best = llr(max(1 + epsilon, m / s))
    if two_sided and epsilon < 1:
        best = max(best, llr(min(1 - epsilon, m / s)))
    return best


def brute_force(w, epsilon, window=None, two_sided=False):
    out = []
    for m in range(1, len(w) + 1):
        first = 1 if window is None else max(1, m - window + 1)
        out.append(max(sup_llr(w[ell - 1 : m], epsilon, two_sided) for ell in range(first, m + 1)))
    return np.array(out)
