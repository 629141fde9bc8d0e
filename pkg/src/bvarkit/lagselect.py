"""Lag-order selection on a common estimation sample.

Every candidate order ``0 .. d_max`` is fitted to the same ``T - d_max``
periods. Criteria are reported per observation, e.g.
``AIC = -2 logL / T + 2 n / T`` with ``n`` the total parameter count.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import stats

from .exceptions import (
    CriterionDomainError, DegenerateCovarianceError, InsufficientSampleError, LagOrderError,
)
from .ols import LN_2PI, VarSpec
from .series import SeriesPanel, _lagged

__all__ = ["CriteriaRow", "LRTest", "SelectionTable", "criteria_row", "lr_test",
           "select_lag", "CRITERIA"]

CRITERIA = ("lr", "fpe", "aic", "sic", "hqic")


@dataclass(frozen=True)
class CriteriaRow:
    lag: int
    loglik: float
    fpe: float
    aic: float
    sic: float
    hqic: float
    n_total: int
    n_per_eq: int
    lr: Optional[float] = None
    lr_reject: Optional[bool] = None


@dataclass(frozen=True)
class LRTest:
    stat: float
    reject: bool
    critical: float
    df: int


@dataclass(frozen=True)
class SelectionTable:
    rows: tuple
    winners: dict
    t_eff: int

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def criteria_row(loglik, ln_det_sigma, t_eff, n_vars, n_per_eq, lag=0) -> CriteriaRow:
    """Information criteria and final prediction error for one lag order.

    >>> r = criteria_row(0.0, 0.0, 10, 1, 0)
    >>> (r.aic, r.sic, r.hqic, r.fpe)
    (0.0, 0.0, 0.0, 1.0)
    """
    if t_eff <= n_per_eq:
        raise CriterionDomainError(
            f"FPE undefined: T_eff={t_eff} does not exceed {n_per_eq} parameters per equation")
    if t_eff <= math.e:
        raise CriterionDomainError(f"HQIC undefined: ln ln T_eff needs T_eff > e, got {t_eff}")
    n_total = n_vars * n_per_eq
    fit = -2.0 * loglik / t_eff
    aic = fit + 2.0 * n_total / t_eff
    sic = fit + n_total * math.log(t_eff) / t_eff
    hqic = fit + 2.0 * n_total * math.log(math.log(t_eff)) / t_eff
    fpe = ((t_eff + n_per_eq) / (t_eff - n_per_eq)) ** n_vars * math.exp(ln_det_sigma)
    return CriteriaRow(lag, float(loglik), fpe, aic, sic, hqic, n_total, n_per_eq)


def lr_test(loglik_curr, loglik_prev, t_eff, m, n_vars=None, alpha=0.05,
            df=None) -> LRTest:
    """Sequential likelihood-ratio test with the small-sample correction.

    ``stat = (T - m) / T * 2 (logL_curr - logL_prev)`` where ``m`` is the
    number of parameters per equation in the larger model. The statistic is
    compared with the upper ``alpha`` quantile of chi-square with ``df``
    degrees of freedom (default ``n_vars ** 2``).
    """
    if m >= t_eff:
        raise CriterionDomainError(
            f"modified LR undefined: m={m} parameters per equation with T_eff={t_eff}")
    if loglik_curr < loglik_prev - 1e-9:
        raise CriterionDomainError(
            "larger model has a smaller log-likelihood; models are not nested on one sample")
    if df is None:
        if n_vars is None:
            raise TypeError("either df or n_vars is required")
        df = n_vars * n_vars
    stat = (t_eff - m) / t_eff * 2.0 * (loglik_curr - loglik_prev)
    stat = max(stat, 0.0)
    critical = float(stats.chi2.ppf(1.0 - alpha, df))
    return LRTest(stat, bool(stat > critical), critical, int(df))


def _fit_loglik(values, d, constant, start):
    Y, X = _lagged(values, d, constant, start)
    if X.shape[1]:
        B, *_ = np.linalg.lstsq(X, Y, rcond=None)
        resid = Y - X @ B
    else:
        resid = Y
    T = Y.shape[0]
    sigma = resid.T @ resid / T
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0 or not np.isfinite(logdet):
        raise DegenerateCovarianceError(f"residual covariance is singular at lag {d}")
    N = sigma.shape[0]
    return -0.5 * T * (N * (1.0 + LN_2PI) + logdet), logdet


def select_lag(panel: SeriesPanel, spec: VarSpec, d_max: int, alpha=0.05) -> SelectionTable:
    """Evaluate lag orders ``0 .. d_max`` and pick a winner per criterion.

    The lag-0 model holds only the constants (or nothing when
    ``spec.constant`` is false). FPE, AIC, SIC and HQIC winners minimise
    their column, ties going to the smaller lag. The LR winner is the largest
    lag whose sequential test against the previous order rejects, or 0.
    """
    spec.check(panel.names)
    if isinstance(d_max, bool) or int(d_max) != d_max or d_max < 0:
        raise LagOrderError(f"d_max must be a non-negative integer, got {d_max!r}")
    d_max = int(d_max)
    T, N = panel.values.shape
    if T - d_max < N * d_max + 2:
        raise InsufficientSampleError(
            f"T={T} is too short for d_max={d_max} with {N} variables "
            f"(need T - d_max >= N d_max + 2)")
    t_eff = T - d_max
    const = 1 if spec.constant else 0

    rows = []
    prev = None
    for lag in range(d_max + 1):
        ll, logdet = _fit_loglik(panel.values, lag, spec.constant, d_max)
        n_per_eq = N * lag + const
        row = criteria_row(ll, logdet, t_eff, N, n_per_eq, lag)
        if prev is not None:
            test = lr_test(ll, prev.loglik, t_eff, n_per_eq, N, alpha)
            row = replace(row, lr=test.stat, lr_reject=test.reject)
        rows.append(row)
        prev = row

    winners = {name: int(np.argmin([getattr(r, name) for r in rows]))
               for name in ("fpe", "aic", "sic", "hqic")}
    rejected = [r.lag for r in rows if r.lr_reject]
    winners["lr"] = max(rejected) if rejected else 0
    return SelectionTable(tuple(rows), winners, t_eff)
