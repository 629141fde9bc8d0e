"""Simulation helpers for synthetic panels and test fixtures."""

import numpy as np

from .series import SeriesPanel

__all__ = ["simulate_var", "synthetic_panel", "FIXTURE_NAMES"]

FIXTURE_NAMES = ("accidents", "population", "gdp", "private_vehicles", "buses",
                 "subway_km", "road_speed")

# level-scale (mean, sd) pairs used to dress the fixture up as annual data
_FIXTURE_SCALE = ((5101.44, 2743.98), (1872.88, 292.01), (1618.19, 994.11),
                  (343.83, 130.88), (2.14, 0.29), (349.17, 213.55), (30.40, 2.70))


def simulate_var(A, T, c=None, cov=None, rng=None, burn=100, y0=None):
    """Draw ``T`` periods from ``y_t = c + sum_k A_k y_{t-k} + e_t``.

    ``A`` is an ``N x N`` matrix or a ``d x N x N`` stack. ``cov=None`` or a
    zero matrix gives a noise-free recursion, in which case ``y0`` (``d x N``,
    oldest first) seeds the process and ``burn`` is ignored.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 2:
        A = A[None]
    d, N, _ = A.shape
    c = np.zeros(N) if c is None else np.asarray(c, dtype=float)
    rng = np.random.default_rng(rng)
    noisy = cov is not None and np.any(np.asarray(cov) != 0)
    if noisy:
        L = np.linalg.cholesky(np.asarray(cov, dtype=float))
    else:
        burn = 0
    n = T + burn
    y = np.zeros((n + d, N))
    if y0 is not None:
        y[:d] = np.asarray(y0, dtype=float).reshape(d, N)
    for t in range(d, n + d):
        y[t] = c + sum(A[k] @ y[t - 1 - k] for k in range(d))
        if noisy:
            y[t] += L @ rng.standard_normal(N)
    if noisy:
        return y[d + burn:]
    return y[:T]


def synthetic_panel(T=18, seed=20030101, start=2003):
    """Seven-variable annual panel drawn from a known stable VAR(1).

    Returns the panel together with the generating ``(A, c, cov)``.
    """
    rng = np.random.default_rng(seed)
    N = len(FIXTURE_NAMES)
    A = np.diag([0.85, 0.9, 0.9, 0.8, 0.6, 0.85, 0.5])
    A[0, 5] = -0.15
    A[0, 6] = 0.10
    A[2, 1] = 0.05
    A[3, 2] = 0.10
    A[5, 2] = 0.10
    c = np.zeros(N)
    cov = 0.04 * (0.7 * np.eye(N) + 0.3)
    z = simulate_var(A, T, c, cov, rng, burn=50)
    z = (z - z.mean(axis=0)) / z.std(axis=0, ddof=1)
    scale = np.array(_FIXTURE_SCALE)
    values = scale[:, 0] + z * scale[:, 1]
    times = tuple(str(start + t) for t in range(T))
    return SeriesPanel(FIXTURE_NAMES, times, values), (A, c, cov)
