"""Panel data model, CSV ingestion, min-max scaling and lagged design matrices."""

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import (
    DuplicateNameError, LagOrderError, MissingValueError, NonNumericError,
    PanelError, RaggedRowError, ShortPanelError, TimeOrderError, ZeroRangeError,
)

__all__ = [
    "SeriesPanel", "NormalizationParams", "Regressor", "DesignMatrices",
    "Summary", "load_panel", "read_panel", "normalize", "denormalize",
    "build_design", "describe",
]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _time_keys(times):
    try:
        return [int(t) for t in times]
    except ValueError:
        return list(times)


@dataclass(frozen=True)
class SeriesPanel:
    """A named multivariate time series.

    ``values`` is ``T x N``: one row per period, one column per variable.
    """

    names: tuple
    times: tuple
    values: np.ndarray

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        times = tuple(str(t) for t in self.times)
        values = _frozen(self.values)
        if values.ndim != 2:
            raise PanelError("values must be a 2-D array")
        T, N = values.shape
        if N < 1 or len(names) != N:
            raise PanelError(f"expected {len(names)} columns with N >= 1, got {N}")
        if len(times) != T:
            raise PanelError(f"{len(times)} period labels for {T} rows")
        if T < 2:
            raise ShortPanelError(f"at least 2 periods are required, got {T}")
        seen = set()
        for name in names:
            if name in seen:
                raise DuplicateNameError(name)
            seen.add(name)
        keys = _time_keys(times)
        for i in range(1, T):
            if not keys[i] > keys[i - 1]:
                raise TimeOrderError(i + 1, times[i - 1], times[i])
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            r, c = bad[0]
            raise MissingValueError(int(r) + 1, names[c])
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def nobs(self):
        return self.values.shape[0]

    @property
    def nvars(self):
        return self.values.shape[1]

    def column(self, name):
        return self.values[:, self.index(name)]

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def with_values(self, values):
        return SeriesPanel(self.names, self.times, values)


def load_panel(source) -> SeriesPanel:
    """Parse a panel from a CSV stream.

    The first row is a header ``time,name1,...,nameN``; each following row
    holds one period. ``source`` may be a binary or text file-like object, or
    raw ``bytes``/``str`` content. Row numbers in error messages are 1-based
    line numbers with the header on line 1.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    text = text.lstrip("\ufeff")

    rows = [(lineno, row) for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1)
            if any(cell.strip() for cell in row)]
    if not rows:
        raise PanelError("empty input")
    _, header = rows[0]
    header = [h.strip() for h in header]
    if len(header) < 2:
        raise PanelError("header must contain a time column and at least one variable")
    names = header[1:]
    for i, name in enumerate(names):
        if not name:
            raise PanelError(f"empty variable name in header column {i + 2}")
        if name in names[:i]:
            raise DuplicateNameError(name)

    times, values = [], []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise RaggedRowError(lineno, len(header), len(row))
        label = row[0].strip()
        if not label:
            raise MissingValueError(lineno, header[0])
        parsed = []
        for name, cell in zip(names, row[1:]):
            cell = cell.strip()
            if not cell:
                raise MissingValueError(lineno, name)
            try:
                x = float(cell)
            except ValueError:
                raise NonNumericError(lineno, name, cell) from None
            if math.isnan(x):
                raise MissingValueError(lineno, name)
            if math.isinf(x):
                raise NonNumericError(lineno, name, cell)
            parsed.append(x)
        times.append(label)
        values.append(parsed)

    if len(values) < 2:
        raise ShortPanelError(f"at least 2 periods are required, got {len(values)}")
    keys = _time_keys(times)
    for i in range(1, len(times)):
        if not keys[i] > keys[i - 1]:
            raise TimeOrderError(rows[i + 1][0], times[i - 1], times[i])
    return SeriesPanel(tuple(names), tuple(times), np.array(values))


def read_panel(path) -> SeriesPanel:
    with open(path, "rb") as fh:
        return load_panel(fh)


@dataclass(frozen=True)
class NormalizationParams:
    """Per-variable ``(min, max)`` bounds used for min-max scaling."""

    mins: np.ndarray
    maxs: np.ndarray
    names: Optional[tuple] = None

    def __post_init__(self):
        mins, maxs = _frozen(self.mins).ravel(), _frozen(self.maxs).ravel()
        if mins.shape != maxs.shape:
            raise PanelError("mins and maxs differ in length")
        names = self.names
        if names is not None:
            names = tuple(names)
            if len(names) != mins.size:
                raise PanelError("names do not match bounds")
        for i in range(mins.size):
            if not maxs[i] > mins[i]:
                raise ZeroRangeError(names[i] if names else i)
        object.__setattr__(self, "mins", _frozen(mins))
        object.__setattr__(self, "maxs", _frozen(maxs))
        object.__setattr__(self, "names", names)

    @property
    def ranges(self):
        return self.maxs - self.mins


def normalize(panel: SeriesPanel):
    """Scale every column to ``[0, 1]`` via ``(x - min) / (max - min)``.

    Returns the scaled panel and the bounds needed to undo it. A constant
    column raises :class:`ZeroRangeError`.
    """
    params = NormalizationParams(panel.values.min(axis=0), panel.values.max(axis=0),
                                 panel.names)
    scaled = (panel.values - params.mins) / params.ranges
    return panel.with_values(scaled), params


def denormalize(panel: SeriesPanel, params: NormalizationParams) -> SeriesPanel:
    if params.mins.size != panel.nvars:
        raise PanelError(
            f"normalization has {params.mins.size} variables, panel has {panel.nvars}")
    return panel.with_values(panel.values * params.ranges + params.mins)


class Regressor(NamedTuple):
    """One column of the regressor matrix; ``variable`` is None for the constant."""

    variable: Optional[str]
    lag: int

    @property
    def label(self):
        return "const" if self.variable is None else f"{self.variable}(-{self.lag})"


@dataclass(frozen=True)
class DesignMatrices:
    """Stacked regression ``Y = X B + E``.

    Row ``t`` of ``Y`` is the response period; the lag-``k`` block of the same
    row of ``X`` holds the values ``k`` periods earlier. Columns of ``X`` are
    ``[const | lag 1 block | ... | lag d block]`` with variables in panel order
    inside each block.
    """

    Y: np.ndarray
    X: np.ndarray
    layout: tuple
    names: tuple
    lags: int
    constant: bool

    @property
    def nobs(self):
        return self.Y.shape[0]

    @property
    def nregressors(self):
        return self.X.shape[1]


def _layout(names, d, constant):
    cols = [Regressor(None, 0)] if constant else []
    cols += [Regressor(name, k) for k in range(1, d + 1) for name in names]
    return tuple(cols)


def _lagged(values, d, constant, start):
    """Response and regressor rows for periods ``start .. T-1`` (0-based)."""
    T, N = values.shape
    Y = values[start:]
    blocks = [np.ones((T - start, 1))] if constant else []
    blocks += [values[start - k:T - k] for k in range(1, d + 1)]
    X = np.hstack(blocks) if blocks else np.empty((T - start, 0))
    return Y, X


def build_design(panel: SeriesPanel, d: int, constant: bool = True,
                 d_max: Optional[int] = None) -> DesignMatrices:
    """Lagged regression matrices for a VAR of order ``d``.

    Parameters
    ----------
    panel : SeriesPanel
    d : int
        Lag order, ``1 <= d <= T - 2``.
    constant : bool
        Prepend a column of ones.
    d_max : int, optional
        When comparing several orders on one sample, the largest candidate
        order. The first ``d_max - d`` usable rows are dropped so every order
        is fitted to the same ``T - d_max`` periods.
    """
    T = panel.nobs
    if isinstance(d, bool) or int(d) != d or not 1 <= d <= T - 2:
        raise LagOrderError(f"lag order must be in [1, {T - 2}], got {d}")
    d = int(d)
    start = d
    if d_max is not None:
        if not d <= d_max <= T - 2:
            raise LagOrderError(f"d_max must be in [{d}, {T - 2}], got {d_max}")
        start = int(d_max)
    Y, X = _lagged(panel.values, d, constant, start)
    return DesignMatrices(_frozen(Y), _frozen(X), _layout(panel.names, d, constant),
                          panel.names, d, bool(constant))


@dataclass(frozen=True)
class Summary:
    mean: float
    median: float
    min: float
    max: float
    sd: float


def describe(panel: SeriesPanel) -> dict:
    """Per-variable mean, median, min, max and sample sd (``T - 1`` divisor)."""
    out = {}
    for j, name in enumerate(panel.names):
        x = panel.values[:, j]
        out[name] = Summary(float(np.mean(x)), float(np.median(x)), float(np.min(x)),
                            float(np.max(x)), float(np.std(x, ddof=1)))
    return out
