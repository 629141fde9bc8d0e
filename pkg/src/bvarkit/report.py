"""Run configuration and the end-to-end report pipeline."""

import datetime
import json
import logging
import math
import os
import shutil
import tempfile
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import __version__
from .dynamics import classify_effect, irf, stability
from .exceptions import (
    BvarError, ConfigError, DiagnosticError, EstimationError, InsufficientSampleError,
    PanelError,
)
from .lagselect import select_lag
from .minnesota import MinnesotaHyper, fit_bvar
from .ols import VarSpec, coefficient_matrix, fit_ols
from .series import _layout, build_design, describe, normalize, read_panel

__all__ = ["RunConfig", "ReportBundle", "PipelineError", "parse_config", "config_to_json",
           "run_pipeline", "SUBCOMMANDS", "EXIT_CODES"]

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("describe", "select-lag", "fit", "stability", "irf", "report")

EXIT_CODES = {"config": 2, "ingestion": 3, "estimation": 4, "diagnostics": 5, "io": 6}

_CRITERIA = ("lr", "fpe", "aic", "sic", "hqic")


@dataclass(frozen=True)
class RunConfig:
    input: str
    output: str
    target: str
    d_max: int = 4
    d: Optional[int] = None
    constant: bool = True
    normalize: bool = True
    select_by: str = "aic"
    hyper: MinnesotaHyper = field(default_factory=MinnesotaHyper)
    horizon: int = 50
    orthogonalized: bool = False
    settle_tolerance: float = 1e-3
    base_dir: str = field(default=".", compare=False)

    def resolve(self, path):
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


# key -> (expected type, required)
_TOP_KEYS = {
    "input": (str, True), "output": (str, True), "target": (str, True),
    "d_max": (int, False), "d": ((int, type(None)), False), "constant": (bool, False),
    "normalize": (bool, False), "select_by": (str, False), "hyper": (dict, False),
    "horizon": (int, False), "orthogonalized": (bool, False),
    "settle_tolerance": (float, False),
}
_HYPER_KEYS = ("gamma", "decay_exponent", "cross_tightness", "constant_scale")


def _typed(value, expected, path):
    types = expected if isinstance(expected, tuple) else (expected,)
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if bool not in types and isinstance(value, bool):
        raise ConfigError(path, f"expected {_type_name(types)}, got boolean")
    if not isinstance(value, types):
        raise ConfigError(path, f"expected {_type_name(types)}, got {type(value).__name__}")
    return value


def _type_name(types):
    names = {str: "string", int: "integer", float: "number", bool: "boolean",
             dict: "object", type(None): "null"}
    return " or ".join(names[t] for t in types)


def parse_config(text, base_dir=".") -> RunConfig:
    """Validate a JSON run configuration and fill in defaults.

    Relative ``input``/``output`` paths are later resolved against
    ``base_dir``; the config itself keeps them verbatim.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown key")
    values = {}
    for key, (expected, required) in _TOP_KEYS.items():
        if key not in raw:
            if required:
                raise ConfigError(key, "missing required key")
            continue
        values[key] = _typed(raw[key], expected, key)

    hyper_raw = values.pop("hyper", {})
    hyper_vals = {}
    for key in hyper_raw:
        if key not in _HYPER_KEYS:
            raise ConfigError(f"hyper.{key}", "unknown key")
    for key in _HYPER_KEYS:
        if key in hyper_raw:
            hyper_vals[key] = _typed(hyper_raw[key], float, f"hyper.{key}")
    for key in ("gamma", "decay_exponent", "constant_scale"):
        if key in hyper_vals and not hyper_vals[key] > 0:
            raise ConfigError(f"hyper.{key}", f"must be positive, got {hyper_vals[key]}")
    ct = hyper_vals.get("cross_tightness")
    if ct is not None and not 0 < ct <= 1:
        raise ConfigError("hyper.cross_tightness", f"must lie in (0, 1], got {ct}")
    values["hyper"] = MinnesotaHyper(**hyper_vals)

    if values.get("d_max", 4) < 0:
        raise ConfigError("d_max", "must be non-negative")
    if values.get("d") is not None:
        if values["d"] < 1:
            raise ConfigError("d", "must be at least 1")
        if "d_max" in values and values["d_max"] < values["d"]:
            raise ConfigError("d", f"exceeds d_max={values['d_max']}")
    if values.get("horizon", 50) < 1:
        raise ConfigError("horizon", "must be at least 1")
    if values.get("settle_tolerance", 1e-3) <= 0:
        raise ConfigError("settle_tolerance", "must be positive")
    if values.get("select_by", "aic") not in _CRITERIA:
        raise ConfigError("select_by", f"must be one of {', '.join(_CRITERIA)}")
    return RunConfig(base_dir=base_dir, **values)


def config_to_dict(config: RunConfig) -> dict:
    out = {}
    for f in fields(config):
        if f.name == "base_dir":
            continue
        value = getattr(config, f.name)
        out[f.name] = asdict(value) if f.name == "hyper" else value
    return out


def config_to_json(config: RunConfig) -> str:
    """Canonical JSON text of a config; ``parse_config`` of it is a fixpoint."""
    return json.dumps(config_to_dict(config), indent=2) + "\n"


class PipelineError(BvarError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.exit_code = EXIT_CODES[stage]
        self.cause = cause
        super().__init__(f"{stage} failed: {cause}")


@dataclass
class ReportBundle:
    command: str
    output_dir: str
    files: list
    describe: dict = None
    normalization: object = None
    selection: object = None
    chosen_d: Optional[int] = None
    ols: object = None
    ols_error: Optional[str] = None
    bvar: object = None
    stability_ols: object = None
    stability_bvar: object = None
    irf: object = None
    verdicts: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)


# -- formatting ------------------------------------------------------------

def _num(x):
    """Shortest round-trip decimal text; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _csv(header, rows):
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def describe_csv(summary):
    rows = [(name, _num(s.mean), _num(s.median), _num(s.min), _num(s.max), _num(s.sd))
            for name, s in summary.items()]
    return _csv(("variable", "mean", "median", "min", "max", "sd"), rows)


def selection_csv(table):
    header = ["lag", "logL", "lr", "fpe", "aic", "sic", "hqic"]
    header += [f"winner_{c}" for c in _CRITERIA]
    rows = []
    for r in table.rows:
        flags = ["true" if table.winners[c] == r.lag else "false" for c in _CRITERIA]
        rows.append([r.lag, _num(r.loglik), _num(r.lr), _num(r.fpe), _num(r.aic),
                     _num(r.sic), _num(r.hqic)] + flags)
    return _csv(header, rows)


def coefficients_csv(estimate, layout):
    B = coefficient_matrix(estimate)
    rows = [[reg.label] + [_num(v) for v in B[r]] for r, reg in enumerate(layout)]
    rows.append(["R-squared"] + [_num(s.r_squared) for s in estimate.per_equation])
    rows.append(["S.E. equation"] + [_num(s.se_equation) for s in estimate.per_equation])
    return _csv(("regressor",) + tuple(estimate.names), rows)


def roots_csv(report):
    rows = [(k, _num(z.real), _num(z.imag), _num(m))
            for k, (z, m) in enumerate(zip(report.roots, report.moduli))]
    return _csv(("index", "real", "imaginary", "modulus"), rows)


def irf_csv(ir):
    flag = "true" if ir.orthogonalized else "false"
    rows = []
    for h in range(ir.horizon + 1):
        for j, impulse in enumerate(ir.names):
            for i, response in enumerate(ir.names):
                rows.append((h, impulse, response, _num(ir.psi[h, i, j]),
                             _num(ir.cumulative[h, i, j]), flag))
    return _csv(("h", "impulse", "response", "value", "cumulative", "orthogonalized"), rows)


def verdicts_csv(verdicts):
    rows = [(v.source, v.target, v.direction, _num(v.share_positive), v.peak_period,
             "" if v.settle_period is None else v.settle_period,
             _num(v.terminal_cumulative)) for v in verdicts]
    return _csv(("source", "target", "direction", "share_positive", "peak_period",
                 "settle_period", "terminal_cumulative"), rows)


def _estimate_json(est):
    return {
        "source": est.source,
        "lags": est.lags,
        "t_eff": est.t_eff,
        "A": est.A,
        "c": est.c,
        "sigma": est.sigma,
        "loglik": est.loglik,
        "r_squared": [s.r_squared for s in est.per_equation],
        "se_equation": [s.se_equation for s in est.per_equation],
    }


def _stability_json(rep):
    return {"stable": rep.stable, "max_modulus": rep.max_modulus,
            "roots": [[z.real, z.imag] for z in rep.roots], "moduli": rep.moduli}


# -- pipeline --------------------------------------------------------------

def _feasible_d_max(T, N, requested, constant=True):
    """Largest lag <= ``requested`` whose common-sample fit leaves at least
    ``N`` residual degrees of freedom, so every candidate has a regular Sigma."""
    d = requested
    while d > 0 and T - d - (N * d + int(constant)) < N:
        d -= 1
    return d


def _run_stages(config, command):
    bundle = ReportBundle(command, config.resolve(config.output), [])
    try:
        panel = read_panel(config.resolve(config.input))
    except OSError as exc:
        raise PipelineError("ingestion", exc) from exc
    except PanelError as exc:
        raise PipelineError("ingestion", exc) from exc
    if config.target not in panel.names:
        raise PipelineError("config", ConfigError(
            "target", f"{config.target!r} is not a column of the input"))
    bundle.describe = describe(panel)
    if config.normalize:
        try:
            panel, bundle.normalization = normalize(panel)
        except PanelError as exc:
            raise PipelineError("ingestion", exc) from exc
    if command == "describe":
        return bundle, panel

    N, T = panel.nvars, panel.nobs
    d_max = _feasible_d_max(T, N, config.d_max, config.constant)
    if d_max < config.d_max:
        logger.warning("d_max=%d is infeasible for T=%d, N=%d; using %d",
                       config.d_max, T, N, d_max)
    base = VarSpec(1, config.constant, panel.names)
    try:
        bundle.selection = select_lag(panel, base, d_max)
    except (EstimationError, DiagnosticError) as exc:
        raise PipelineError("estimation", exc) from exc
    bundle.provenance["d_max_used"] = d_max
    if config.d is not None:
        bundle.chosen_d = config.d
        bundle.provenance["chosen_by"] = "config"
    else:
        bundle.chosen_d = max(1, bundle.selection.winners[config.select_by])
        bundle.provenance["chosen_by"] = config.select_by
    if command == "select-lag":
        return bundle, panel

    spec = VarSpec(bundle.chosen_d, config.constant, panel.names)
    try:
        design = build_design(panel, spec.d, spec.constant)
    except BvarError as exc:
        raise PipelineError("estimation", exc) from exc
    try:
        bundle.ols = fit_ols(design, spec)
    except EstimationError as exc:
        logger.warning("OLS estimation failed: %s", exc)
        bundle.ols_error = str(exc)
    try:
        bundle.bvar = fit_bvar(panel, spec, config.hyper)
    except (EstimationError, InsufficientSampleError) as exc:
        raise PipelineError("estimation", exc) from exc
    bundle.provenance["layout"] = [reg.label for reg in design.layout]
    if command == "fit":
        return bundle, panel

    try:
        if bundle.ols is not None:
            bundle.stability_ols = stability(bundle.ols)
        bundle.stability_bvar = stability(bundle.bvar)
        if command == "stability":
            return bundle, panel
        bundle.irf = irf(bundle.bvar, config.horizon, config.orthogonalized)
        bundle.verdicts = [
            classify_effect(bundle.irf, config.target, name, config.settle_tolerance)
            for name in panel.names if name != config.target]
    except (DiagnosticError, EstimationError) as exc:
        raise PipelineError("diagnostics", exc) from exc
    return bundle, panel


def _artifacts(bundle, command):
    files = {}
    if command in ("describe", "report"):
        files["describe.csv"] = describe_csv(bundle.describe)
    if command in ("select-lag", "report"):
        files["selection.csv"] = selection_csv(bundle.selection)
    if command in ("fit", "report"):
        layout = _layout(bundle.bvar.names, bundle.bvar.lags, bundle.bvar.spec.constant)
        if bundle.ols is not None:
            files["coefficients_ols.csv"] = coefficients_csv(bundle.ols, layout)
        files["coefficients_bvar.csv"] = coefficients_csv(bundle.bvar, layout)
    if command in ("stability", "report"):
        if bundle.stability_ols is not None:
            files["roots_ols.csv"] = roots_csv(bundle.stability_ols)
        files["roots_bvar.csv"] = roots_csv(bundle.stability_bvar)
    if command in ("irf", "report"):
        files["irf.csv"] = irf_csv(bundle.irf)
        files["verdicts.csv"] = verdicts_csv(bundle.verdicts)
    return files


def _report_json(bundle, config, names):
    doc = {
        "tool": "bvarkit",
        "version": __version__,
        "command": bundle.command,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": config_to_dict(config),
        "variables": list(names),
        "describe": {k: asdict(v) for k, v in bundle.describe.items()},
    }
    if bundle.normalization is not None:
        doc["normalization"] = {"min": bundle.normalization.mins,
                                "max": bundle.normalization.maxs}
    if bundle.selection is not None:
        doc["lag_selection"] = {
            "d_max_used": bundle.provenance["d_max_used"],
            "t_eff": bundle.selection.t_eff,
            "winners": bundle.selection.winners,
            "rows": [asdict(r) for r in bundle.selection.rows],
            "chosen_d": bundle.chosen_d,
            "chosen_by": bundle.provenance["chosen_by"],
        }
    if bundle.bvar is not None:
        doc["estimates"] = {
            "layout": bundle.provenance["layout"],
            "ols": _estimate_json(bundle.ols) if bundle.ols is not None
            else {"error": bundle.ols_error},
            "bvar": dict(_estimate_json(bundle.bvar), hyper=asdict(config.hyper)),
        }
    if bundle.stability_bvar is not None:
        ols_stable = None if bundle.stability_ols is None else bundle.stability_ols.stable
        doc["stability"] = {
            "ols": None if bundle.stability_ols is None
            else _stability_json(bundle.stability_ols),
            "bvar": _stability_json(bundle.stability_bvar),
            "ols_unstable_bvar_stable": bool(ols_stable is False
                                             and bundle.stability_bvar.stable),
        }
    if bundle.irf is not None:
        doc["irf"] = {"horizon": bundle.irf.horizon,
                      "orthogonalized": bundle.irf.orthogonalized,
                      "shock_scale": bundle.irf.shock_scale,
                      "target": config.target}
        doc["verdicts"] = [asdict(v) for v in bundle.verdicts]
    return doc


def _write_atomic(out_dir, files):
    """Write ``files`` into a sibling temp directory, then swap it into place."""
    out_dir = os.path.abspath(out_dir)
    parent = os.path.dirname(out_dir)
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=f".{os.path.basename(out_dir)}.tmp-", dir=parent)
    try:
        for name, text in files.items():
            with open(os.path.join(tmp, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        backup = None
        if os.path.lexists(out_dir):
            backup = tmp + ".old"
            os.rename(out_dir, backup)
        os.rename(tmp, out_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if backup is not None:
        if os.path.isdir(backup) and not os.path.islink(backup):
            shutil.rmtree(backup, ignore_errors=True)
        else:
            os.remove(backup)


def run_pipeline(config: RunConfig, command: str = "report",
                 output_dir: Optional[str] = None) -> ReportBundle:
    """Run the pipeline up to ``command`` and write its artifacts.

    Raises
    ------
    PipelineError
        Carrying the failing stage and its exit code. Nothing is written to
        the output directory unless every stage succeeds.
    """
    if command not in SUBCOMMANDS:
        raise ValueError(f"unknown command {command!r}")
    if output_dir is not None:
        config = RunConfig(**{**{f.name: getattr(config, f.name) for f in fields(config)},
                              "output": os.path.abspath(output_dir)})
    bundle, panel = _run_stages(config, command)
    files = _artifacts(bundle, command)
    names = sorted(files) + ["report.json"]
    doc = _report_json(bundle, config, panel.names)
    doc["manifest"] = names
    files["report.json"] = json.dumps(_jsonable(doc), indent=2) + "\n"
    try:
        _write_atomic(bundle.output_dir, files)
    except OSError as exc:
        raise PipelineError("io", exc) from exc
    bundle.files = names
    bundle.provenance["report"] = doc
    return bundle
