"""Quantile-conditional covariance and correlation.

Estimate correlations restricted to quantile sets, calibrate them by Monte
Carlo and scan quantile splits to test independence.
"""
from .analytic import (
    BoundaryPoints, CopulaDensity, NormalProductModel, gaussian_copula, normal_product_boundaries,
    normal_product_cov, product_copula, quadrature_cov, v_c,
)
from .condstats import (
    CondCorrMatrix, CondMoments, cond_corr_matrix, cond_moments, projection_cond_corr,
    recursive_independence_probe,
)
from .errors import (
    DataError, DegenerateVariance, DomainError, EmptyConditionError, InsufficientData, IoError,
    QCorrError,
)
from .inference import (
    GridSpec, NullDistribution, ScanGrid, TestReport, analytic_scan, x_split_grid, upper_bound_grid,
    mc_null, null_quantile, scan_splits, test_statistic,
)
from .kernels import BACKEND
from .quantile import (
    FULL_RANGE, ConditionMask, QuantileBox, QuantileSplit, SampleMatrix, empirical_quantile,
    membership_mask, ordinal_ranks,
)
from .special import (
    QuadratureRule, RngStream, gauss_legendre, norm_cdf, norm_pdf, norm_quantile,
    standard_normal_sample,
)
from .synth import GeneratorSpec, generate
from .timeseries import CondAcfResult, Series, cond_acf, lag_pairs

__version__ = "0.1.0"
