import numpy as np
import pytest

from corrqcd.vdensity import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ref_params():
    return ModelParams(10, 100, 1)


def ks_distance(samples, cdf):
    """Two-sided Kolmogorov-Smirnov distance between a sample and a CDF callable."""
    x = np.sort(np.asarray(samples, dtype=float))
    f = cdf(x)
    m = x.size
    upper = np.arange(1, m + 1) / m - f
    lower = f - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))
