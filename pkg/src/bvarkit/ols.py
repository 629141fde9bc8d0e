"""Equation-by-equation least-squares VAR estimation."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import (
    DegenerateCovarianceError, DegenerateScaleError, DegreesOfFreedomError,
    InsufficientSampleError, LagOrderError, SingularDesignError,
)
from .series import DesignMatrices, SeriesPanel, _lagged

__all__ = [
    "VarSpec", "EquationStats", "VarEstimate", "fit_ols", "log_likelihood",
    "fit_stats", "univariate_ar_sigmas", "coefficient_matrix", "RANK_TOL",
]

# relative singular-value cutoff for the regressor matrix
RANK_TOL = 1e-10

LN_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class VarSpec:
    d: int
    constant: bool = True
    variable_order: tuple = ()

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise LagOrderError(f"lag order must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "variable_order", tuple(self.variable_order))

    def check(self, names):
        if tuple(names) != self.variable_order:
            raise ValueError(
                f"variable order {self.variable_order} does not match {tuple(names)}")


@dataclass(frozen=True)
class EquationStats:
    r_squared: float
    se_equation: float


@dataclass(frozen=True)
class VarEstimate:
    """Fitted VAR.

    ``A[k - 1][i, j]`` is the effect of variable ``j`` at lag ``k`` in the
    equation for variable ``i``. ``sigma`` is the residual covariance with
    divisor ``t_eff``.
    """

    spec: VarSpec
    A: np.ndarray
    c: np.ndarray
    sigma: np.ndarray
    t_eff: int
    loglik: Optional[float] = None
    per_equation: tuple = ()
    source: str = "ols"
    posterior: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("A", "c", "sigma"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_coefficients(cls, A, c=None, sigma=None, names=None, t_eff=0,
                          source="ols"):
        """Wrap known coefficient matrices, e.g. published estimates.

        ``A`` is a single ``N x N`` matrix or a sequence of them (one per lag).
        """
        A = np.asarray(A, dtype=float)
        if A.ndim == 2:
            A = A[None]
        d, N, _ = A.shape
        if names is None:
            names = tuple(f"y{i + 1}" for i in range(N))
        spec = VarSpec(d, c is not None, tuple(names))
        c = np.zeros(N) if c is None else np.asarray(c, dtype=float)
        sigma = np.zeros((N, N)) if sigma is None else np.asarray(sigma, dtype=float)
        return cls(spec, A, c, sigma, t_eff, source=source)

    @property
    def names(self):
        return self.spec.variable_order

    @property
    def nvars(self):
        return self.A.shape[1]

    @property
    def lags(self):
        return self.A.shape[0]


def coefficient_matrix(estimate: VarEstimate) -> np.ndarray:
    """``K x N`` matrix ``B`` with ``Y = X B`` in the design layout."""
    rows = [estimate.c[None, :]] if estimate.spec.constant else []
    rows += [Ak.T for Ak in estimate.A]
    return np.vstack(rows)


def _unpack(B, spec, N):
    offset = 1 if spec.constant else 0
    c = B[0].copy() if spec.constant else np.zeros(N)
    A = np.stack([B[offset + k * N:offset + (k + 1) * N].T for k in range(spec.d)])
    return A, c


def _check_rank(X, layout):
    if X.shape[0] < X.shape[1]:
        raise SingularDesignError(
            f"{X.shape[0]} usable rows for {X.shape[1]} regressors per equation")
    if X.shape[1] == 0:
        return
    _, s, vt = np.linalg.svd(X, full_matrices=False)
    if s[-1] <= RANK_TOL * s[0]:
        v = vt[-1]
        involved = [layout[i].label for i in np.argsort(-np.abs(v))
                    if abs(v[i]) > 0.1 * np.abs(v).max()]
        raise SingularDesignError(
            "regressor matrix is rank deficient (smallest/largest singular value "
            f"{s[-1] / s[0]:.3g}); near-collinear columns: {', '.join(involved)}")


def _residual_stats(Y, resid, nparams, strict=True):
    T = Y.shape[0]
    ssr = (resid ** 2).sum(axis=0)
    sst = ((Y - Y.mean(axis=0)) ** 2).sum(axis=0)
    dof = T - nparams
    if dof <= 0 and strict:
        raise DegreesOfFreedomError(
            f"{T} observations leave no residual degrees of freedom for {nparams} parameters")
    out = []
    for i in range(Y.shape[1]):
        if sst[i] > 0:
            r2 = 1.0 - ssr[i] / sst[i]
        else:
            r2 = 1.0 if ssr[i] == 0 else -math.inf
        se = math.sqrt(ssr[i] / dof) if dof > 0 else math.nan
        out.append(EquationStats(float(r2), se))
    return tuple(out)


def _loglik(sigma, t_eff):
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0 or not np.isfinite(logdet):
        raise DegenerateCovarianceError("residual covariance is singular")
    N = sigma.shape[0]
    return -0.5 * t_eff * (N * (1.0 + LN_2PI) + logdet)


def fit_ols(design: DesignMatrices, spec: VarSpec) -> VarEstimate:
    """Least-squares VAR fit.

    Each equation is regressed on the same regressors, which coincides with
    Gaussian maximum likelihood. The log-likelihood is left as ``None`` when
    the residual covariance is singular (e.g. an exact fit).

    Raises
    ------
    SingularDesignError
        If the regressor matrix has fewer rows than columns or its smallest
        singular value is below ``RANK_TOL`` times the largest.
    """
    spec.check(design.names)
    if spec.d != design.lags or spec.constant != design.constant:
        raise ValueError("spec does not match the design matrices")
    X, Y = design.X, design.Y
    _check_rank(X, design.layout)
    B, *_ = np.linalg.lstsq(X, Y, rcond=None)
    resid = Y - X @ B
    T = Y.shape[0]
    sigma = resid.T @ resid / T
    sigma = 0.5 * (sigma + sigma.T)
    A, c = _unpack(B, spec, Y.shape[1])
    try:
        ll = _loglik(sigma, T)
    except DegenerateCovarianceError:
        ll = None
    stats = _residual_stats(Y, resid, X.shape[1], strict=False)
    return VarEstimate(spec, A, c, sigma, T, ll, stats, "ols")


def log_likelihood(estimate: VarEstimate) -> float:
    """Gaussian log-likelihood ``-(T/2) (N (1 + ln 2 pi) + ln det Sigma)``."""
    return _loglik(estimate.sigma, estimate.t_eff)


def fit_stats(design: DesignMatrices, estimate: VarEstimate) -> tuple:
    """Per-equation R-squared and standard error of regression.

    R-squared is ``1 - SSR/SST`` with SST about the response mean; the
    standard error divides SSR by ``T_eff - K``.
    """
    resid = design.Y - design.X @ coefficient_matrix(estimate)
    return _residual_stats(design.Y, resid, design.nregressors, strict=True)


def univariate_ar_sigmas(panel: SeriesPanel, d: int, constant: bool = True,
                         d_max: Optional[int] = None) -> np.ndarray:
    """Residual standard deviation of a univariate AR(d) for each variable.

    All variables use the sample ``d_max .. T-1`` (``d_max`` defaults to
    ``d``), the same rows the system regression uses. The divisor is
    ``T_eff - (d + constant)``.
    """
    start = d if d_max is None else d_max
    T = panel.nobs
    nparams = d + (1 if constant else 0)
    if d < 1 or start < d:
        raise LagOrderError(f"invalid lag order {d} (d_max={d_max})")
    t_eff = T - start
    if t_eff <= nparams:
        raise InsufficientSampleError(
            f"{t_eff} usable rows cannot support an AR({d}) with {nparams} parameters")
    s = np.empty(panel.nvars)
    for j, name in enumerate(panel.names):
        y, X = _lagged(panel.values[:, [j]], d, constant, start)
        b, *_ = np.linalg.lstsq(X, y, rcond=None)
        e = (y - X @ b).ravel()
        s[j] = math.sqrt(e @ e / (t_eff - nparams))
        if not s[j] > 1e-10 * np.abs(y).max():
            raise DegenerateScaleError(
                f"univariate AR({d}) for {name!r} fits exactly; residual scale is zero")
    return s
