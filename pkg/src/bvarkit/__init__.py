"""Classical and Minnesota-prior Bayesian VARs for short multivariate panels."""

from .dynamics import classify_effect, companion, irf, stability
from .lagselect import criteria_row, lr_test, select_lag
from .minnesota import MinnesotaHyper, build_prior, fit_bvar, posterior
from .ols import VarEstimate, VarSpec, fit_ols, fit_stats, log_likelihood, univariate_ar_sigmas
from .series import (
    SeriesPanel, build_design, denormalize, describe, load_panel, normalize, read_panel,
)

__all__ = [
    "SeriesPanel", "load_panel", "read_panel", "normalize", "denormalize", "describe",
    "build_design", "VarSpec", "VarEstimate", "fit_ols", "fit_stats", "log_likelihood",
    "univariate_ar_sigmas", "criteria_row", "lr_test", "select_lag", "MinnesotaHyper",
    "build_prior", "posterior", "fit_bvar", "companion", "stability", "irf",
    "classify_effect",
]

__version__ = "0.1.0"
