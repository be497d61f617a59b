"""Bayesian threshold selection for extreme value models via measures of surprise."""

from ._core import (
    DomainError,
    EmptyResultError,
    NumericalError,
    UsageError,
    classical_threshold_select,
    frechet_transform,
    gen_bivariate,
    gen_univariate,
    gpd_cdf,
    gpd_log_density,
    gpd_mle,
    gpd_quantile,
    gpd_sample,
    mean_residual_life,
    multivariate_sweep,
    posterior_predictive_pvalue_gpd,
    run_cli,
    to_pseudo_polar,
    univariate_sweep,
)

__all__ = [
    "DomainError",
    "EmptyResultError",
    "NumericalError",
    "UsageError",
    "classical_threshold_select",
    "frechet_transform",
    "gen_bivariate",
    "gen_univariate",
    "gpd_cdf",
    "gpd_log_density",
    "gpd_mle",
    "gpd_quantile",
    "gpd_sample",
    "mean_residual_life",
    "multivariate_sweep",
    "posterior_predictive_pvalue_gpd",
    "run_cli",
    "to_pseudo_polar",
    "univariate_sweep",
]
