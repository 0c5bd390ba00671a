"""Sequential detectors on the transformed statistic W = w_transform(V).

Under f_V(.; J) the per-sample log-likelihood ratio against J = 1 is
``log J - (J - 1) * W``, so every GLR segment score has the closed form

    score(J) = m' * log J - (J - 1) * sum(W),

maximized over the admissible J by clamping the rate MLE m' / sum(W).
"""

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from corrqcd.errors import ParameterError
from corrqcd.vdensity import kl_divergence, w_transform

INCREASE = "increase"
TWO_SIDED = "two-sided"
# score reported for segments whose W values are all zero (every V == 1)
DEGENERATE_SCORE = 1e6


class SegmentScore(NamedTuple):
    score: float
    j_hat: float
    degenerate: bool


@dataclass(frozen=True)
class GlrConfig:
    """Stopping-rule parameters.

    ``window`` is an int, ``"auto"`` (ceil(4 A / I(1 + epsilon))) or
    ``None`` for the unbounded rule that scans every candidate change point.
    """

    threshold: float
    epsilon: float = 1.5
    window: object = "auto"
    sidedness: str = INCREASE

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if math.isnan(self.threshold):
            raise ParameterError("threshold must not be NaN")
        if self.sidedness not in (INCREASE, TWO_SIDED):
            raise ParameterError(f"sidedness must be {INCREASE!r} or {TWO_SIDED!r}")
        if self.window not in ("auto", None) and (int(self.window) != self.window or self.window < 1):
            raise ParameterError(f"window must be a positive integer, 'auto' or None, got {self.window}")

    @classmethod
    def from_beta(cls, beta, **kwargs):
        return cls(threshold=calibrate_threshold(beta), **kwargs)

    @property
    def effective_window(self):
        if self.window == "auto":
            return default_window(self.threshold, self.epsilon)
        return self.window


def default_window(threshold, epsilon):
    """ceil(4 A / I(1 + epsilon)), at least 1; None (unbounded) for A = +inf."""
    if threshold == math.inf:
        return None
    if not threshold > 0:
        return 1
    return max(1, math.ceil(4.0 * threshold / kl_divergence(1.0 + epsilon)))


def calibrate_threshold(beta):
    """Threshold A = log(beta) giving mean time to false alarm of at least ~beta."""
    if not beta >= 1:
        raise ParameterError(f"beta must be >= 1, got {beta}")
    return math.log(beta)


def _scores(count, total, epsilon, sidedness):
    # vectorized clamped-GLR score for segments with `count` samples summing to `total`
    count = np.asarray(count, dtype=float)
    total = np.asarray(total, dtype=float)
    degenerate = total <= 0.0
    safe = np.where(degenerate, 1.0, total)
    mle = np.where(degenerate, np.inf, count / safe)
    j_up = np.maximum(1.0 + epsilon, mle)
    with np.errstate(invalid="ignore"):
        score = np.where(degenerate, DEGENERATE_SCORE, count * np.log(j_up) - (j_up - 1.0) * total)
    j_hat = j_up
    if sidedness == TWO_SIDED and epsilon < 1.0:
        j_dn = np.minimum(1.0 - epsilon, mle)
        with np.errstate(invalid="ignore"):
            s_dn = count * np.log(j_dn) - (j_dn - 1.0) * total
        better = s_dn > score
        score = np.where(better, s_dn, score)
        j_hat = np.where(better, j_dn, j_hat)
    return score, j_hat, degenerate


def segment_score(w_values, epsilon=1.5, sidedness=INCREASE):
    """Best log-likelihood ratio of one segment over |J - 1| >= epsilon."""
    w = np.asarray(w_values, dtype=float)
    if w.size == 0:
        raise ParameterError("segment_score needs at least one value")
    if np.any(w < 0):
        raise ParameterError("W values must be nonnegative")
    score, j_hat, degenerate = _scores(w.size, w.sum(), epsilon, sidedness)
    return SegmentScore(float(score), float(j_hat), bool(degenerate))


@dataclass
class DetectorState:
    m: int = 0
    w_buffer: deque = field(default_factory=deque)
    current_stat: float = -math.inf
    stopped: bool = False
    best_start: int = 0
    j_hat: float = math.nan


@dataclass(frozen=True)
class Verdict:
    stopping_time: int
    change_point_estimate: int
    j_estimate: float


def window_statistic(w_buffer, epsilon, sidedness=INCREASE):
    """Max segment score over all suffixes of ``w_buffer``.

    Returns (stat, suffix_length, j_hat) where the winning segment is the
    last ``suffix_length`` values; ties go to the longest suffix.
    """
    w = np.asarray(w_buffer, dtype=float)
    sums = np.cumsum(w[::-1])
    counts = np.arange(1, w.size + 1)
    score, j_hat, _ = _scores(counts, sums, epsilon, sidedness)
    best = w.size - 1 - int(np.argmax(score[::-1]))
    return float(score[best]), best + 1, float(j_hat[best])


def _advance(state, w, config):
    if state.stopped:
        raise RuntimeError("detector has already stopped")
    state.m += 1
    state.w_buffer.append(w)
    stat, length, j_hat = window_statistic(state.w_buffer, config.epsilon, config.sidedness)
    state.current_stat = stat
    state.best_start = state.m - length + 1
    state.j_hat = j_hat
    state.stopped = stat > config.threshold
    return state


def new_state(config):
    return DetectorState(w_buffer=deque(maxlen=config.effective_window))


def glr_step(state, v, config, params):
    """One GLR update on a copy of ``state``; the input state is left untouched."""
    copy = DetectorState(
        state.m,
        deque(state.w_buffer, maxlen=config.effective_window),
        state.current_stat,
        state.stopped,
        state.best_start,
        state.j_hat,
    )
    return _advance(copy, float(w_transform(float(v), params)), config)


class GlrDetector:
    """Window-limited GLR stopping rule fed one V value at a time.

    >>> from corrqcd.vdensity import ModelParams
    >>> det = GlrDetector(GlrConfig(threshold=5.0), ModelParams(10, 100))
    >>> det.step(0.999).stopped
    True
    """

    def __init__(self, config, params):
        self.config = config
        self.params = params
        self.state = new_state(config)

    def step(self, v):
        return self.step_w(float(w_transform(float(v), self.params)))

    def step_w(self, w):
        return _advance(self.state, w, self.config)

    def verdict(self):
        st = self.state
        if not st.stopped:
            return None
        return Verdict(st.m, st.best_start, st.j_hat)

    def run(self, values):
        """Feed ``values`` until the rule stops; returns the Verdict or None."""
        for v in values:
            if self.step(v).stopped:
                return self.verdict()
        return None


def path_statistics(w, epsilon, window, sidedness=INCREASE, history=()):
    """GLR statistic after each value of ``w``, vectorized along the stream.

    ``history`` holds the W values that precede ``w`` (only the last
    ``window - 1`` matter for a bounded window). For a bounded window this
    costs O(len(w) * window) memory; with ``window=None`` it is quadratic.
    """
    w = np.asarray(w, dtype=float)
    hist = np.asarray(history, dtype=float)
    if window is not None:
        hist = hist[len(hist) - min(len(hist), window - 1):]
    ctx = np.concatenate([hist, w])
    h, L = hist.size, w.size
    span = ctx.size if window is None else window
    prefix = np.concatenate([[0.0], np.cumsum(ctx)])
    ends = np.arange(h + 1, h + L + 1)
    lengths = np.arange(1, span + 1)
    starts = ends[:, None] - lengths[None, :]
    valid = starts >= 0
    total = prefix[ends][:, None] - prefix[np.maximum(starts, 0)]
    score, _, _ = _scores(lengths[None, :], np.where(valid, total, 1.0), epsilon, sidedness)
    score = np.where(valid, score, -np.inf)
    return score.max(axis=1)


def cusum_on_w(w_values, j1, threshold):
    """CuSum recursion with known post-change J on transformed values."""
    if not (j1 > 0 and j1 != 1):
        raise ParameterError(f"j1 must be positive and != 1, got {j1}")
    s = 0.0
    start = 1
    log_j = math.log(j1)
    for m, w in enumerate(w_values, start=1):
        if s <= 0.0:
            s = 0.0
            start = m
        s += log_j - (j1 - 1.0) * w
        if s > threshold:
            return Verdict(m, start, float(j1))
    return None


def cusum_known_j(stream, j1, params, threshold):
    """CuSum baseline over V values; returns a Verdict or None if it never stops."""
    return cusum_on_w((float(w_transform(float(v), params)) for v in stream), j1, threshold)
