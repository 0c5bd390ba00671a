"""Change-point scenarios and Monte Carlo estimation of delay and false-alarm time.

Every Monte Carlo path owns a generator seeded from ``SeedSequence(seed,
spawn_key=(0, path))``; a path consumes its stream strictly in block order,
so results do not depend on chunk sizes or on how paths are split across
worker processes.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from corrqcd.corrstats import summary_statistics
from corrqcd.errors import ParameterError
from corrqcd.qcd import path_statistics
from corrqcd.vdensity import mle_j, v_from_w, w_transform

DEFAULT_HORIZON = 10**6
_TRIAL_STREAM = 0
_ESTIMATE_STREAM = 1


def path_rng(seed, path, stream=_TRIAL_STREAM):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, path)))


@dataclass(frozen=True, eq=False)
class CovarianceSpec:
    kind: str
    p: int
    diag_values: np.ndarray = None
    block_size: int = None
    wishart_dof: int = None
    matrix: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("diagonal", "block-wishart", "explicit"):
            raise ParameterError(f"unknown covariance kind {self.kind!r}")
        cov = self.covariance()
        if cov.shape != (self.p, self.p):
            raise ParameterError(f"covariance must be {self.p}x{self.p}, got {cov.shape}")
        if not np.allclose(cov, cov.T, atol=0.0, rtol=0.0):
            raise ParameterError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ParameterError("covariance is not positive definite") from None
        object.__setattr__(self, "_chol", chol)
        diag_only = np.count_nonzero(cov - np.diag(np.diag(cov))) == 0
        object.__setattr__(self, "_scale", np.sqrt(np.diag(cov)) if diag_only else None)

    @classmethod
    def identity(cls, p):
        return cls("diagonal", p, diag_values=np.ones(p))

    @classmethod
    def diagonal(cls, values):
        values = np.asarray(values, dtype=float)
        if np.any(values <= 0):
            raise ParameterError("diagonal variances must be positive")
        return cls("diagonal", values.size, diag_values=values)

    @classmethod
    def explicit(cls, matrix):
        matrix = np.asarray(matrix, dtype=float)
        return cls("explicit", matrix.shape[0], matrix=matrix)

    def covariance(self):
        if self.kind == "diagonal":
            return np.diag(np.asarray(self.diag_values, dtype=float))
        return np.asarray(self.matrix, dtype=float)

    def cholesky(self):
        return self._chol

    def transform(self, z):
        """Map standard-normal rows z (..., p) to rows with this covariance."""
        if self._scale is not None:
            return z * self._scale
        return z @ self._chol.T


def sample_wishart_block_cov(p, k, dof, rng):
    """I_p with its top-left k x k block replaced by W / dof, W ~ Wishart(I_k, dof).

    W is drawn by the Bartlett decomposition W = A A^T, with A lower
    triangular, A_ii^2 ~ chi2(dof - i) and N(0, 1) entries below the diagonal.
    """
    if int(k) != k or not 1 <= k <= p:
        raise ParameterError(f"block size must be in [1, p], got {k}")
    if dof < k:
        raise ParameterError(f"Wishart dof must be >= block size ({k}), got {dof}")
    a = np.zeros((k, k))
    a[np.diag_indices(k)] = np.sqrt(rng.chisquare(dof - np.arange(k)))
    low = np.tril_indices(k, -1)
    a[low] = rng.standard_normal(len(low[0]))
    cov = np.eye(p)
    block = a @ a.T / dof
    cov[:k, :k] = 0.5 * (block + block.T)
    return CovarianceSpec("block-wishart", p, block_size=k, wishart_dof=dof, matrix=cov)


def equicorrelated_block_cov(p, k, rho):
    """I_p with a k x k block of unit variances and common correlation rho."""
    cov = np.eye(p)
    cov[:k, :k] = rho
    cov[np.arange(k), np.arange(k)] = 1.0
    return CovarianceSpec.explicit(cov)


@dataclass(frozen=True)
class ConstantMean:
    """Mean policy returning the same mean vector at every time index."""

    value: float

    def __call__(self, m, p):
        return np.full(p, self.value)


@dataclass(frozen=True, eq=False)
class ChangeModel:
    """Gaussian rows with covariance ``pre`` for m < gamma and ``post`` for m >= gamma."""

    n: int
    p: int
    pre: CovarianceSpec
    post: CovarianceSpec
    gamma: float = 1
    mean_policy: object = None
    seed: int = 0

    def __post_init__(self):
        if self.pre.p != self.p or self.post.p != self.p:
            raise ParameterError("pre/post covariance dimensions must match p")
        if not self.gamma >= 1:
            raise ParameterError(f"gamma must be >= 1, got {self.gamma}")
        if self.n < 3:
            raise ParameterError("n must be >= 3")

    def with_gamma(self, gamma):
        return ChangeModel(self.n, self.p, self.pre, self.post, gamma, self.mean_policy, self.seed)


def generate_blocks(model, start, count, rng):
    """Blocks for time indices start, ..., start + count - 1, shape (count, n, p)."""
    z = rng.standard_normal((count, model.n, model.p))
    m = np.arange(start, start + count)
    pre = m < model.gamma
    out = np.empty_like(z)
    if pre.any():
        out[pre] = model.pre.transform(z[pre])
    if (~pre).any():
        out[~pre] = model.post.transform(z[~pre])
    if model.mean_policy is not None:
        for i, mi in enumerate(m):
            out[i] += model.mean_policy(int(mi), model.p)
    return out


def generate_block(model, m, rng):
    """One (n, p) block at time index m: i.i.d. rows mu_m + L z."""
    return generate_blocks(model, m, 1, rng)[0]


@dataclass(frozen=True, eq=False)
class PipelineSource:
    """V stream computed from full Gaussian block generation."""

    model: ChangeModel
    delta: int = 1
    max_chunk: int = 256

    @property
    def gamma(self):
        return self.model.gamma

    def with_gamma(self, gamma):
        return PipelineSource(self.model.with_gamma(gamma), self.delta, self.max_chunk)

    def values(self, rng, start, count):
        return summary_statistics(generate_blocks(self.model, start, count, rng), self.delta)


@dataclass(frozen=True, eq=False)
class FastPathSource:
    """V stream sampled directly from f_V(.; J_pre) before gamma and f_V(.; J_post) after."""

    params: object
    j_post: float
    gamma: float = 1
    j_pre: float = 1.0
    max_chunk: int = 4096

    def with_gamma(self, gamma):
        return FastPathSource(self.params, self.j_post, gamma, self.j_pre, self.max_chunk)

    def values(self, rng, start, count):
        e = rng.standard_exponential(count)
        m = np.arange(start, start + count)
        rate = np.where(m < self.gamma, self.j_pre, self.j_post)
        return v_from_w(e / rate, self.params)


def stopping_time(source, config, params, rng, horizon=DEFAULT_HORIZON, first_chunk=32):
    """First m with GLR statistic above the threshold, or None if m would exceed ``horizon``."""
    window = config.effective_window
    history = np.empty(0)
    start = 1
    chunk = first_chunk
    while start <= horizon:
        count = min(chunk, horizon - start + 1)
        w = w_transform(source.values(rng, start, count), params)
        stats = path_statistics(w, config.epsilon, window, config.sidedness, history)
        hit = np.flatnonzero(stats > config.threshold)
        if hit.size:
            return start + int(hit[0])
        history = np.concatenate([history, w])
        if window is not None:
            history = history[-(window - 1):] if window > 1 else history[:0]
        start += count
        chunk = min(2 * chunk, source.max_chunk)
    return None


@dataclass
class McResult:
    paths: int
    estimate: float
    std_error: float
    threshold_A: float
    censored: int = 0
    times: np.ndarray = field(default=None, repr=False)

    @property
    def fully_censored(self):
        return self.censored == self.paths


def _path_range_times(source, config, params, seed, first, last, horizon):
    out = np.empty(last - first)
    for i, path in enumerate(range(first, last)):
        tau = stopping_time(source, config, params, path_rng(seed, path), horizon)
        out[i] = np.nan if tau is None else tau
    return out


def simulate_stopping_times(source, config, params, paths, seed, horizon=DEFAULT_HORIZON, workers=1):
    """Stopping time of each path in path order; NaN marks a path censored at ``horizon``."""
    if paths < 1:
        raise ParameterError("paths must be >= 1")
    if config.threshold == math.inf:
        return np.full(paths, np.nan)
    if workers <= 1 or paths < 2 * workers:
        return _path_range_times(source, config, params, seed, 0, paths, horizon)
    edges = np.linspace(0, paths, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(
            _path_range_times,
            *zip(*[(source, config, params, seed, a, b, horizon) for a, b in zip(edges[:-1], edges[1:])]),
        )
        return np.concatenate(list(parts))


def _summarize(values, paths, threshold, censored, times):
    mean = float(np.mean(values)) if values.size else math.nan
    se = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else math.nan
    return McResult(paths, mean, se, threshold, censored, times)


def conditional_delay_trial(source, config, params, paths, seed, horizon=DEFAULT_HORIZON, workers=1):
    """Estimate E_gamma[tau - gamma | tau >= gamma]; paths that alarm before gamma are excluded.

    Censored paths enter with tau = horizon + 1, so the estimate is then a lower bound.
    """
    gamma = source.gamma
    times = simulate_stopping_times(source, config, params, paths, seed, horizon, workers)
    censored = int(np.isnan(times).sum())
    filled = np.where(np.isnan(times), horizon + 1, times)
    kept = filled[filled >= gamma]
    return _summarize(kept - gamma, paths, config.threshold, censored, times)


def run_delay_trial(source, config, params, paths, seed, horizon=DEFAULT_HORIZON, workers=1):
    """Mean detection delay tau - 1 with the change at gamma = 1."""
    if source.gamma != 1:
        raise ParameterError(f"delay trials need gamma = 1, got {source.gamma}")
    return conditional_delay_trial(source, config, params, paths, seed, horizon, workers)


def run_mtfa_trial(source, config, params, paths, seed, horizon=DEFAULT_HORIZON, workers=1):
    """Mean time to false alarm with no change (gamma = infinity).

    Censored paths enter at the horizon, making the estimate a lower bound.
    """
    if source.gamma != math.inf:
        raise ParameterError(f"false-alarm trials need gamma = inf, got {source.gamma}")
    times = simulate_stopping_times(source, config, params, paths, seed, horizon, workers)
    censored = int(np.isnan(times).sum())
    filled = np.where(np.isnan(times), horizon, times)
    return _summarize(filled, paths, config.threshold, censored, times)


def sample_values(source, count, seed, stream=_ESTIMATE_STREAM):
    """``count`` consecutive V values from the start of a dedicated estimation stream."""
    rng = path_rng(seed, 0, stream)
    out = []
    start = 1
    while start <= count:
        c = min(source.max_chunk, count - start + 1)
        out.append(source.values(rng, start, c))
        start += c
    return np.concatenate(out)


def estimate_post_change_j(source, params, count, seed):
    """MLE of J from ``count`` post-change V values of ``source``."""
    return mle_j(sample_values(source.with_gamma(1), count, seed), params)


def reference_scenario(n=10, p=100, k=5, dof=None, seed=0, gamma=1, var_range=(0.5, 2.0)):
    """Diagonal pre-change covariance with random variances; Wishart block post-change.

    Both covariances are drawn once from ``seed`` and stay fixed across paths.
    """
    dof = k + 2 if dof is None else dof
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, 0)))
    pre = CovarianceSpec.diagonal(rng.uniform(*var_range, size=p))
    post = sample_wishart_block_cov(p, k, dof, rng)
    return ChangeModel(n, p, pre, post, gamma=gamma, seed=seed)
