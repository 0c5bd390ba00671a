"""Quickest detection of dispersion changes in streams of random matrices.

Each n x p block is reduced to the max k-NN correlation statistic V, whose
large-p law is a one-parameter exponential family indexed by J (J = 1 for
diagonal dispersion). A GLR stopping rule over the V stream detects J != 1.
"""

from corrqcd.corrstats import (
    DegreeProfile,
    SummaryValue,
    degree_profile,
    knn_corr_distance,
    sample_correlation,
    summary_statistic,
)
from corrqcd.errors import CorrQcdError, DegenerateInputError, ParameterError
from corrqcd.qcd import (
    GlrConfig,
    GlrDetector,
    Verdict,
    calibrate_threshold,
    cusum_known_j,
    segment_score,
)
from corrqcd.vdensity import (
    ModelParams,
    cdf_v,
    kl_divergence,
    lambda_of_rho,
    log_pdf_v,
    mle_j,
    p0,
    sample_v,
    t_integral,
    t_inverse,
    w_transform,
)

__version__ = "0.1.0"
