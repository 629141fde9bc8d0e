"""Minnesota-prior Bayesian VAR with a plug-in residual covariance.

Coefficients are stacked equation by equation: ``beta = vec(B)`` where ``B``
is the ``K x N`` coefficient matrix of :class:`~bvarkit.series.DesignMatrices`
(``K`` regressors, one column per equation). For a fixed ``Sigma`` the
stacked system ``vec(Y) = (I_N kron X) beta + e`` with
``cov(e) = Sigma kron I_T`` and prior ``beta ~ N(mu0, diag(m0))`` gives the
normal conditional posterior

    V      = [Sigma^-1 kron X'X + diag(m0)^-1]^-1
    beta_B = V [vec(X' Y Sigma^-1) + diag(m0)^-1 mu0]
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import (
    DefinitenessError, DegenerateCovarianceError, DegenerateScaleError,
    EstimationError, SingularDesignError,
)
from .ols import (
    VarEstimate, VarSpec, _loglik, _residual_stats, _unpack, fit_ols,
    univariate_ar_sigmas,
)
from .series import DesignMatrices, SeriesPanel, _layout, build_design

__all__ = ["MinnesotaHyper", "MinnesotaPrior", "PosteriorEstimate", "build_prior",
           "posterior", "fit_bvar"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinnesotaHyper:
    """Prior hyperparameters.

    The prior sd of the lag-``k`` coefficient on variable ``j`` in equation
    ``i`` is ``gamma * k**-decay_exponent * f(i, j) * s_i / s_j`` with
    ``f(i, i) = 1`` and ``f(i, j) = cross_tightness`` otherwise. Constants get
    sd ``constant_scale``.
    """

    gamma: float = 0.1
    decay_exponent: float = 1.0
    cross_tightness: float = 0.5
    constant_scale: float = 1e3

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.decay_exponent > 0:
            raise ValueError(f"decay_exponent must be positive, got {self.decay_exponent}")
        if not 0 < self.cross_tightness <= 1:
            raise ValueError(f"cross_tightness must lie in (0, 1], got {self.cross_tightness}")
        if not self.constant_scale > 0:
            raise ValueError(f"constant_scale must be positive, got {self.constant_scale}")


@dataclass(frozen=True)
class MinnesotaPrior:
    """Independent normal prior on the stacked coefficients.

    ``mu0`` and ``m0_diag`` have length ``K * N``; entry ``i * K + r`` refers to
    regressor ``layout[r]`` in equation ``i``.
    """

    mu0: np.ndarray
    m0_diag: np.ndarray
    layout: tuple
    nvars: int
    hyper: MinnesotaHyper = None

    def __post_init__(self):
        mu0 = np.array(self.mu0, dtype=float).ravel()
        m0 = np.array(self.m0_diag, dtype=float).ravel()
        if mu0.shape != m0.shape or mu0.size != len(self.layout) * self.nvars:
            raise ValueError("prior dimensions do not match layout and equation count")
        if not np.all(m0 > 0) or not np.all(np.isfinite(m0)):
            raise DefinitenessError("prior variances must be finite and positive")
        mu0.setflags(write=False)
        m0.setflags(write=False)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "m0_diag", m0)
        object.__setattr__(self, "layout", tuple(self.layout))


@dataclass(frozen=True)
class PosteriorEstimate:
    beta: np.ndarray
    cov: np.ndarray
    sigma: np.ndarray
    hyper: MinnesotaHyper = None

    def coefficients(self, nregressors):
        """Posterior mean reshaped to the ``K x N`` layout."""
        return self.beta.reshape(-1, nregressors).T


def build_prior(hyper: MinnesotaHyper, s, spec: VarSpec, nvars: int) -> MinnesotaPrior:
    """Minnesota prior centred on a random walk for each variable."""
    s = np.asarray(s, dtype=float).ravel()
    if s.size != nvars:
        raise ValueError(f"expected {nvars} residual scales, got {s.size}")
    if not np.all(s > 0):
        raise DegenerateScaleError("residual scales must be positive")
    names = spec.variable_order or tuple(f"y{i + 1}" for i in range(nvars))
    layout = _layout(names, spec.d, spec.constant)
    K = len(layout)
    mu0 = np.zeros((nvars, K))
    sd = np.empty((nvars, K))
    for i in range(nvars):
        for r, reg in enumerate(layout):
            if reg.variable is None:
                sd[i, r] = hyper.constant_scale
                continue
            j = names.index(reg.variable)
            own = i == j
            if own and reg.lag == 1:
                mu0[i, r] = 1.0
            sd[i, r] = (hyper.gamma * reg.lag ** -hyper.decay_exponent
                        * (1.0 if own else hyper.cross_tightness) * s[i] / s[j])
    return MinnesotaPrior(mu0.ravel(), (sd ** 2).ravel(), layout, nvars, hyper)


def posterior(design: DesignMatrices, prior: MinnesotaPrior, sigma) -> PosteriorEstimate:
    """Conditional posterior of the stacked coefficients given ``sigma``.

    Both the ``N x N`` covariance and the ``KN x KN`` posterior precision are
    handled through Cholesky factorizations.
    """
    X, Y = design.X, design.Y
    T, N = Y.shape
    K = X.shape[1]
    if prior.nvars != N or len(prior.layout) != K:
        raise ValueError(
            f"prior is for {prior.nvars} equations x {len(prior.layout)} regressors, "
            f"design has {N} x {K}")
    sigma = np.array(sigma, dtype=float)
    try:
        sig_cf = linalg.cho_factor(sigma, lower=True)
    except linalg.LinAlgError:
        raise DefinitenessError("residual covariance is not positive definite") from None
    sigma_inv = linalg.cho_solve(sig_cf, np.eye(N))
    sigma_inv = 0.5 * (sigma_inv + sigma_inv.T)

    prior_prec = 1.0 / prior.m0_diag
    precision = np.kron(sigma_inv, X.T @ X)
    precision[np.diag_indices_from(precision)] += prior_prec
    rhs = (X.T @ Y @ sigma_inv).T.ravel() + prior_prec * prior.mu0
    try:
        cf = linalg.cho_factor(precision, lower=True)
    except linalg.LinAlgError:
        raise DefinitenessError("posterior precision is not positive definite") from None
    beta = linalg.cho_solve(cf, rhs)
    cov = linalg.cho_solve(cf, np.eye(precision.shape[0]))
    cov = 0.5 * (cov + cov.T)
    for a in (beta, cov, sigma):
        a.setflags(write=False)
    return PosteriorEstimate(beta, cov, sigma, prior.hyper)


def _plugin_sigma(design, spec, scales):
    try:
        est = fit_ols(design, spec)
    except SingularDesignError as exc:
        logger.info("OLS plug-in unavailable (%s); using univariate AR variances", exc)
        return np.diag(scales ** 2)
    if est.loglik is None:
        logger.info("OLS residual covariance is singular; using univariate AR variances")
        return np.diag(scales ** 2)
    return np.array(est.sigma)


def fit_bvar(panel: SeriesPanel, spec: VarSpec, hyper: MinnesotaHyper = None,
             d_max=None) -> VarEstimate:
    """Posterior-mean VAR under the Minnesota prior.

    ``Sigma`` is plugged in from an OLS fit on the same design. When OLS is
    infeasible (fewer usable rows than regressors, collinear regressors or a
    singular residual covariance) the diagonal of univariate AR residual
    variances is used instead. The returned estimate carries that ``Sigma``;
    ``se_equation`` is NaN when the equation has no residual degrees of
    freedom.
    """
    hyper = hyper or MinnesotaHyper()
    spec.check(panel.names)
    design = build_design(panel, spec.d, spec.constant, d_max)
    N = panel.nvars
    scales = univariate_ar_sigmas(panel, spec.d, spec.constant, d_max)
    sigma = _plugin_sigma(design, spec, scales)
    prior = build_prior(hyper, scales, spec, N)
    post = posterior(design, prior, sigma)
    B = post.coefficients(design.nregressors)
    A, c = _unpack(B, spec, N)
    resid = design.Y - design.X @ B
    stats = _residual_stats(design.Y, resid, design.nregressors, strict=False)
    try:
        ll = _loglik(sigma, design.nobs)
    except DegenerateCovarianceError:
        ll = None
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(c))):
        raise EstimationError("posterior mean is not finite")
    return VarEstimate(spec, A, c, sigma, design.nobs, ll, stats, "bvar_posterior_mean",
                       posterior=post)
