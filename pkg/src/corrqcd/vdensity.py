"""Limiting law of the summary statistic V and its exponential-family calculus.

For fixed (n, p, delta) the CDF of V is

    P(V <= rho) = exp(-J * Lambda(rho) / phi),   Lambda(rho) = C * T(rho)**delta,

with T(rho) = int_rho^1 (1 - u^2)^((n-4)/2) du. The map
W = Lambda(V) / phi sends V ~ f_V(.; J) to an Exponential(rate J) variable
(truncated at Lambda(0)/phi, where V has an atom at 0), which is what makes
MLE, KL divergence and the GLR statistic closed-form.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from corrqcd.errors import InfiniteEstimateError, ParameterError
from corrqcd.special import betainc_reg, log_beta


def _check_n(n):
    if int(n) != n or n < 3:
        raise ParameterError(f"n must be an integer >= 3, got {n}")


def log_a_n(n):
    """log of the pair-exceedance normalizer a_n = 2 / B((n-2)/2, 1/2).

    With this constant P0(0) = a_n * T(0) = 1, i.e. P0(rho) is the null
    probability that one sample correlation has |R| >= rho.
    """
    _check_n(n)
    return math.log(2.0) - log_beta((n - 2) / 2.0, 0.5)


@dataclass(frozen=True)
class ModelParams:
    """Fixed constants of the V density for block shape (n, p) and hub degree delta."""

    n: int
    p: int
    delta: int = 1
    log_C: float = field(init=False, repr=False)

    def __post_init__(self):
        _check_n(self.n)
        if int(self.p) != self.p or self.p < 2:
            raise ParameterError(f"p must be an integer >= 2, got {self.p}")
        if int(self.delta) != self.delta or not 1 <= self.delta <= self.p - 1:
            raise ParameterError(f"delta must be an integer in [1, p-1], got {self.delta}")
        log_binom = (
            math.lgamma(self.p) - math.lgamma(self.delta + 1) - math.lgamma(self.p - self.delta)
        )
        log_c = math.log(self.p) + log_binom + self.delta * log_a_n(self.n)
        object.__setattr__(self, "log_C", log_c)

    @property
    def a_n(self):
        return math.exp(log_a_n(self.n))

    @property
    def C(self):
        return math.exp(self.log_C)

    @property
    def phi(self):
        return 2 if self.delta == 1 else 1

    @property
    def w_max(self):
        """Largest attainable W, i.e. Lambda(0) / phi."""
        return float(w_transform(0.0, self))


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(np.isnan(rho)) or np.any((rho < 0) | (rho > 1)):
        raise ParameterError("rho must lie in [0, 1]")
    return rho


def _check_j(J):
    if not (np.isfinite(J) and J > 0):
        raise ParameterError(f"J must be positive and finite, got {J}")


def t_integral(rho, n):
    """T(rho) = int_rho^1 (1 - u^2)^((n-4)/2) du, vectorized over rho.

    Uses u^2 = t, which gives T(rho) = B(1/2, (n-2)/2) / 2 * I_{1-rho^2}((n-2)/2, 1/2).
    """
    _check_n(n)
    rho = _check_rho(rho)
    a = (n - 2) / 2.0
    x = (1.0 - rho) * (1.0 + rho)
    return 0.5 * math.exp(log_beta(0.5, a)) * betainc_reg(a, 0.5, x)


def t_prime(rho, n):
    """dT/drho = -(1 - rho^2)^((n-4)/2)."""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.power((1.0 - rho) * (1.0 + rho), (n - 4) / 2.0)


def t_inverse(w, n, tol=1e-14):
    """Solve T(rho) = w for rho in [0, 1] (vectorized safeguarded Newton)."""
    _check_n(n)
    w = np.asarray(w, dtype=float)
    t0 = float(t_integral(0.0, n))
    if np.any(np.isnan(w)) or np.any((w < 0) | (w > t0 * (1 + 1e-15))):
        raise ParameterError(f"w must lie in [0, T(0)] = [0, {t0}]")
    scalar = w.ndim == 0
    w = np.atleast_1d(w).copy()
    alpha = (n - 4) / 2.0
    # T(rho) ~ 2^alpha (1 - rho)^(alpha + 1) / (alpha + 1) near rho = 1
    guess = 1.0 - ((alpha + 1.0) * w / 2.0**alpha) ** (1.0 / (alpha + 1.0))
    rho = np.clip(guess, 0.0, 1.0)
    lo = np.zeros_like(w)
    hi = np.ones_like(w)
    done = (w == 0.0) | (w >= t0)
    rho[w == 0.0] = 1.0
    rho[w >= t0] = 0.0
    for _ in range(200):
        act = ~done
        if not act.any():
            break
        r = rho[act]
        f = t_integral(r, n) - w[act]
        l, h = lo[act], hi[act]
        # T is decreasing: T(r) > w means the root lies to the right
        l = np.where(f > 0, r, l)
        h = np.where(f <= 0, r, h)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / t_prime(r, n)
            cand = r - step
        conv = (np.abs(step) <= tol) | (h - l <= tol) | (f == 0)
        bad = ~conv & (~np.isfinite(cand) | (cand <= l) | (cand >= h))
        cand = np.where(bad, 0.5 * (l + h), cand)
        rho[act] = np.where(f == 0, r, cand)
        lo[act], hi[act] = l, h
        idx = np.flatnonzero(act)
        done[idx[conv]] = True
    return rho[0] if scalar else rho


def p0(rho, n):
    """Null pair-exceedance probability P0(rho) = a_n * T(rho)."""
    return math.exp(log_a_n(n)) * t_integral(rho, n)


def _log_t(rho, n):
    with np.errstate(divide="ignore"):
        return np.log(t_integral(rho, n))


def lambda_of_rho(rho, params):
    """Lambda(rho) = C * T(rho)**delta, evaluated in log space."""
    log_lam = params.log_C + params.delta * _log_t(rho, params.n)
    return np.exp(log_lam)


def w_transform(rho, params):
    """W = Lambda(rho) / phi; Exponential(rate J) when V ~ f_V(.; J)."""
    log_w = params.log_C + params.delta * _log_t(rho, params.n) - math.log(params.phi)
    return np.exp(log_w)


def cdf_v(rho, params, J=1.0):
    """P(V <= rho) = exp(-J * Lambda(rho) / phi); includes the atom at rho = 0."""
    _check_j(J)
    return np.exp(-J * w_transform(rho, params))


def log_pdf_v(rho, params, J=1.0):
    """Log density of the continuous component of V on (0, 1]."""
    _check_j(J)
    rho = _check_rho(rho)
    if np.any(rho == 0):
        raise ParameterError("log_pdf_v is defined on (0, 1]; rho = 0 carries the atom")
    n, delta = params.n, params.delta
    if n <= 3 and np.any(rho == 1):
        raise ParameterError(f"density diverges at rho = 1 for n = {n}")
    log_t = _log_t(rho, n)
    expo = (n - 4) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        one_minus = np.log1p(-rho) + np.log1p(rho)
        shape_term = np.where(expo == 0, 0.0, expo * one_minus)
        tpow_term = np.where(delta == 1, 0.0, (delta - 1) * log_t)
    w = np.exp(params.log_C + delta * log_t - math.log(params.phi))
    return (
        params.log_C
        + math.log(delta)
        - math.log(params.phi)
        + tpow_term
        + shape_term
        + math.log(J)
        - J * w
    )


def pdf_v(rho, params, J=1.0):
    return np.exp(log_pdf_v(rho, params, J))


def sample_v(params, J, rng, size=None):
    """Draw V ~ f_V(.; J) by inverting W ~ Exponential(J).

    Draws beyond the support of W land on the atom V = 0.
    """
    _check_j(J)
    e = rng.standard_exponential(size) / J
    return v_from_w(e, params)


def v_from_w(w, params):
    """Inverse of :func:`w_transform`; values above ``params.w_max`` map to 0."""
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        log_t = (np.log(params.phi) + np.log(w) - params.log_C) / params.delta
    t = np.exp(log_t)
    t0 = float(t_integral(0.0, params.n))
    atom = t >= t0
    out = np.zeros_like(t)
    if np.any(~atom):
        out[~atom] = t_inverse(t[~atom], params.n)
    return out[()] if out.ndim == 0 else out


def mle_j(samples, params):
    """Rate MLE of J from V samples: m / sum(W_i)."""
    v = np.atleast_1d(np.asarray(samples, dtype=float))
    if v.size == 0:
        raise ParameterError("mle_j needs at least one sample")
    total = float(np.sum(w_transform(v, params)))
    if total == 0.0:
        raise InfiniteEstimateError("all samples have V = 1; the MLE of J is infinite")
    return v.size / total


def kl_divergence(J, params=None):
    """KL divergence of f_V(.; J) from f_V(.; 1): log J + 1/J - 1.

    Exact for the exponential reduction; the truncation at W = Lambda(0)/phi
    contributes a term of order exp(-Lambda(0)/phi), which is ignored.
    ``params`` is accepted for interface symmetry and not otherwise used.
    """
    J = np.asarray(J, dtype=float)
    if np.any(~np.isfinite(J)) or np.any(J <= 0):
        raise ParameterError("J must be positive and finite")
    out = np.log(J) + 1.0 / J - 1.0
    return float(out) if out.ndim == 0 else out
