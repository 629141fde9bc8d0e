"""Companion-form stability and impulse-response analysis."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .exceptions import DefinitenessError, NumericalFailureError
from .ols import VarEstimate

__all__ = ["StabilityReport", "ImpulseResponse", "EffectVerdict", "companion",
           "stability", "irf", "classify_effect"]


@dataclass(frozen=True)
class StabilityReport:
    roots: np.ndarray
    moduli: np.ndarray
    stable: bool

    @property
    def max_modulus(self):
        return float(self.moduli[0]) if self.moduli.size else 0.0


@dataclass(frozen=True)
class ImpulseResponse:
    """Moving-average response tensor.

    ``psi[h, i, j]`` is the response of variable ``i`` at step ``h`` to a
    shock in variable ``j``; ``cumulative[h]`` sums ``psi[0..h]``.
    """

    psi: np.ndarray
    cumulative: np.ndarray
    orthogonalized: bool
    names: tuple

    @property
    def horizon(self):
        return self.psi.shape[0] - 1

    @property
    def shock_scale(self):
        return "one-sd-cholesky" if self.orthogonalized else "unit"

    def index(self, var):
        if isinstance(var, str):
            return self.names.index(var)
        return int(var)


@dataclass(frozen=True)
class EffectVerdict:
    source: str
    target: str
    direction: str
    share_positive: float
    peak_period: int
    settle_period: Optional[int]
    terminal_cumulative: float


def companion(estimate: VarEstimate) -> np.ndarray:
    """``Nd x Nd`` companion matrix ``[[A_1 .. A_d], [I 0], ...]``."""
    A = np.asarray(estimate.A)
    d, N, _ = A.shape
    if d == 1:
        return A[0].copy()
    F = np.zeros((N * d, N * d))
    F[:N] = np.hstack(list(A))
    F[N:, :-N] = np.eye(N * (d - 1))
    return F


def stability(estimate: VarEstimate) -> StabilityReport:
    """Eigenvalues of the companion matrix; stable iff every modulus is < 1."""
    F = companion(estimate)
    try:
        roots = np.linalg.eigvals(F)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigenvalue computation failed: {exc}") from None
    moduli = np.abs(roots)
    order = np.argsort(-moduli, kind="stable")
    roots, moduli = roots[order], moduli[order]
    return StabilityReport(roots, moduli, bool(np.all(moduli < 1.0)))


def irf(estimate: VarEstimate, horizon: int, orthogonalized: bool = False) -> ImpulseResponse:
    """Impulse responses for steps ``0 .. horizon``.

    Unit shocks give ``psi[0] = I`` and ``psi[h] = sum_k A_k psi[h - k]``.
    With ``orthogonalized`` every ``psi[h]`` is post-multiplied by the lower
    Cholesky factor of ``Sigma`` (variables shocked in panel order).
    """
    if horizon < 0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    A = np.asarray(estimate.A)
    d, N, _ = A.shape
    psi = np.zeros((horizon + 1, N, N))
    psi[0] = np.eye(N)
    for h in range(1, horizon + 1):
        for k in range(1, min(h, d) + 1):
            psi[h] += A[k - 1] @ psi[h - k]
    if orthogonalized:
        try:
            P = linalg.cholesky(np.asarray(estimate.sigma), lower=True)
        except linalg.LinAlgError:
            raise DefinitenessError(
                "Sigma is not positive definite; orthogonalized responses are undefined"
            ) from None
        psi = psi @ P
    cumulative = np.cumsum(psi, axis=0)
    psi.setflags(write=False)
    cumulative.setflags(write=False)
    return ImpulseResponse(psi, cumulative, bool(orthogonalized), tuple(estimate.names))


def classify_effect(ir: ImpulseResponse, target, source, tolerance: float = 1e-3) -> EffectVerdict:
    """Classify the effect of ``source`` on ``target`` by the sign of its
    cumulative response.

    The share of steps ``1..H`` with a positive cumulative response decides:
    above one half means the source increases the target, below one half that
    it decreases it. ``settle_period`` is the first step from which the plain
    response stays below ``tolerance`` in absolute value through ``H``, or
    None if it never does.
    """
    i, j = ir.index(target), ir.index(source)
    H = ir.horizon
    if H < 1:
        raise ValueError("classification needs a horizon of at least 1")
    path = ir.psi[:, i, j]
    cum = ir.cumulative[1:, i, j]
    share = float(np.mean(cum > 0))
    if share > 0.5:
        direction = "increases"
    elif share < 0.5:
        direction = "decreases"
    else:
        direction = "indeterminate"
    peak = int(np.argmax(np.abs(path)))
    above = np.flatnonzero(np.abs(path) >= tolerance)
    if above.size == 0:
        settle = 0
    elif above[-1] == H:
        settle = None
    else:
        settle = int(above[-1] + 1)
    return EffectVerdict(ir.names[j], ir.names[i], direction, share, peak, settle,
                         float(ir.cumulative[-1, i, j]))
