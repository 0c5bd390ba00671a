"""Sample correlations, k-NN correlation distances and correlation-graph hubs.

A data block is an ``(n, p)`` array whose rows are i.i.d. samples of a
p-vector. Everything here is a pure function of its inputs.
"""

from dataclasses import dataclass

import numpy as np

from corrqcd.errors import DegenerateInputError, ParameterError


@dataclass(frozen=True)
class SummaryValue:
    v: float
    delta: int

    def __float__(self):
        return float(self.v)


@dataclass(frozen=True)
class DegreeProfile:
    rho: float
    delta: int
    degrees: np.ndarray
    hub_count: int


def check_block(block):
    """Validate and return ``block`` as a float array of shape (n, p)."""
    x = np.asarray(block, dtype=float)
    if x.ndim != 2:
        raise ParameterError(f"data block must be 2-dimensional, got shape {x.shape}")
    n, p = x.shape
    if n < 3 or p < 2:
        raise ParameterError(f"data block needs n >= 3 and p >= 2, got n={n}, p={p}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("data block contains non-finite entries")
    return x


def _normalized_columns(x):
    xc = x - x.mean(axis=-2, keepdims=True)
    norms = np.sqrt(np.einsum("...ij,...ij->...j", xc, xc))
    return xc, norms


def sample_correlation(block):
    """Pearson correlation matrix of the columns of ``block``.

    Columns are centered once and normalized; R is the Gram matrix of the
    unit columns, symmetrized and with an exact unit diagonal.

    The arithmetic runs on the columns sorted into a canonical order, so a
    column permutation of ``block`` permutes R bit for bit.
    """
    x = check_block(block)
    order = np.lexsort(x)
    inv = np.argsort(order)
    x = np.ascontiguousarray(x[:, order])
    xc, norms = _normalized_columns(x)
    scale = np.abs(x).max(axis=0)
    flat = (norms <= 1e-13 * np.maximum(scale, 1e-300) * np.sqrt(x.shape[0]))[inv]
    if flat.any():
        j = int(np.flatnonzero(flat)[0])
        raise DegenerateInputError(f"column {j} has zero sample variance", column=j)
    u = xc / norms
    r = u.T @ u
    r = 0.5 * (r + r.T)
    np.clip(r, -1.0, 1.0, out=r)
    np.fill_diagonal(r, 1.0)
    return r[np.ix_(inv, inv)]


def _check_k(k, p):
    if int(k) != k or not 1 <= k <= p - 1:
        raise ParameterError(f"k must be an integer in [1, p-1] = [1, {p - 1}], got {k}")


def knn_corr_distance(R, k, i):
    """k-th largest |R_ij| over j != i."""
    R = np.asarray(R)
    p = R.shape[0]
    _check_k(k, p)
    row = np.abs(np.delete(R[i], i))
    return float(np.partition(row, p - 1 - k)[p - 1 - k])


def knn_corr_distances(R, k):
    """k-th largest off-diagonal |R_ij| for every row i (vectorized over leading axes)."""
    a = np.abs(np.asarray(R, dtype=float))
    p = a.shape[-1]
    _check_k(k, p)
    a = a.copy()
    # the diagonal is 1, which would otherwise occupy the top slot
    idx = np.arange(p)
    a[..., idx, idx] = -1.0
    return np.partition(a, p - k, axis=-1)[..., p - k]


def summary_statistic(block, delta=1):
    """V_delta = max_i of the delta-th nearest-neighbor correlation magnitude."""
    R = sample_correlation(block)
    return SummaryValue(float(knn_corr_distances(R, delta).max()), int(delta))


def summary_statistics(blocks, delta=1):
    """V_delta for a stack of blocks shaped (m, n, p); returns an array of length m.

    No validation beyond shape; intended for simulated data on hot paths.
    """
    x = np.asarray(blocks, dtype=float)
    xc, norms = _normalized_columns(x)
    u = xc / norms[..., None, :]
    r = np.matmul(np.swapaxes(u, -1, -2), u)
    m, p = r.shape[0], r.shape[-1]
    if delta == 1:
        flat = r.reshape(m, p * p)
        flat[:, :: p + 1] = 0.0
        return np.minimum(np.maximum(flat.max(axis=1), -flat.min(axis=1)), 1.0)
    return np.minimum(knn_corr_distances(r, delta).max(axis=-1), 1.0)


def degree_profile(R, delta, rho):
    """Degrees of the correlation graph {|R_ij| >= rho, i != j} and its hub count."""
    R = np.asarray(R, dtype=float)
    p = R.shape[0]
    _check_k(delta, p)
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"rho must lie in [0, 1], got {rho}")
    adj = np.abs(R) >= rho
    np.fill_diagonal(adj, False)
    degrees = adj.sum(axis=1)
    return DegreeProfile(float(rho), int(delta), degrees, int(np.count_nonzero(degrees >= delta)))
