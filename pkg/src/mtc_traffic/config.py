"""Experiment configuration: flat ``key = value`` files, presets and overrides.

Lists are comma separated, ``#`` starts a comment.  Resolution order is
preset, then config file, then command-line flags; a key that overrides a
preset value is logged.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from mtc_traffic.atpf import CustomTableAtpf, DiskStepAtpf, ExponentialAtpf, load_custom_table
from mtc_traffic.errors import ConfigError
from mtc_traffic.sim_engine import MODELS, SWEEP_AXES, Scenario
from mtc_traffic.traffic_models import RateParams

log = logging.getLogger(__name__)

LAMBDA_E_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0)

TABLE1 = {
    "lambda_m": "0.1",
    "cell_radius": "20",
    "rate_alarm": "1",
    "rate_regular": "0.01",
    "atpf": "exponential",
    "atpf_scale": "1",
    "window_extent": "100",
}

PRESETS: dict[str, dict[str, str]] = {
    "table1-defaults": {
        **TABLE1,
        "model": "bernoulli",
        "sweep_axis": "lambda_e",
        "sweep_values": ",".join(repr(v) for v in LAMBDA_E_GRID),
    },
    "fig3": {
        **TABLE1,
        "model": "bernoulli",
        "sweep_axis": "lambda_e",
        "sweep_values": ",".join(repr(v) for v in LAMBDA_E_GRID),
        "n_trials": "500",
        "n_slots": "200",
    },
    # The second event density of the q-sweep figure is an assumption.
    "fig4": {
        **TABLE1,
        "sweep_axis": "q",
        "sweep_values": "0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9",
        "series_lambda_e": "0.01,0.001",
        "series_models": "markov,bernoulli",
        "n_trials": "500",
        "n_slots": "200",
    },
    "fig5": {
        **TABLE1,
        "lambda_m": "0.01",
        "lambda_e": "0.01",
        "model": "markov",
        "series_q": "0.1,0.5,0.9",
        "n_trials": "100",
        "n_slots": "10000",
        "max_lag": "50",
    },
}

FLOAT_KEYS = {
    "lambda_m", "lambda_e", "cell_radius", "rate_regular", "rate_alarm", "atpf_scale",
    "atpf_threshold", "atpf_level", "atpf_r_cut", "q", "epsilon", "window_extent",
}
INT_KEYS = {"n_slots", "n_trials", "seed", "device_count", "max_lag", "workers"}
BOOL_KEYS = {"atpf_check_monotone", "packetize"}
STR_KEYS = {
    "atpf", "atpf_table", "model", "event_window", "acf_convention", "sweep_axis",
    "output", "format", "preset",
}
LIST_KEYS = {"sweep_values", "series_lambda_e", "series_q", "series_models"}
KNOWN_KEYS = FLOAT_KEYS | INT_KEYS | BOOL_KEYS | STR_KEYS | LIST_KEYS

SCENARIO_DEFAULTS = Scenario()


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment: base scenario, optional sweep and series, output."""

    scenario: Scenario
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] = ()
    series_lambda_e: tuple[float, ...] = ()
    series_q: tuple[float, ...] = ()
    series_models: tuple[str, ...] = ()
    output: str | None = None
    format: str = "csv"
    preset: str | None = None
    workers: int = 1
    atpf_table: str | None = None
    raw: Mapping[str, str] = field(default_factory=dict, compare=False, repr=False)

    def series(self) -> list[tuple[str, Scenario]]:
        """(label, scenario) for every combination of the series lists."""
        dims = []
        if self.series_lambda_e:
            dims.append([("lambda_e", v) for v in self.series_lambda_e])
        if self.series_q:
            dims.append([("q", v) for v in self.series_q])
        if self.series_models:
            dims.append([("model", v) for v in self.series_models])
        if not dims:
            return [("", self.scenario)]
        out = []
        for combo in itertools.product(*dims):
            label = ";".join(f"{k}={v!r}" if k != "model" else f"{k}={v}" for k, v in combo)
            out.append((label, replace(self.scenario, **dict(combo))))
        return out


def _strip(text: str) -> str:
    return text.split("#", 1)[0].strip()


def read_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines into a raw string mapping."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = _strip(line)
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in out:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _float(key, v):
    try:
        x = float(v)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None
    if math.isnan(x):
        raise ConfigError(f"{key}: NaN is not allowed")
    return x


def _int(key, v):
    try:
        x = float(v)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {v!r}") from None
    if not x.is_integer():
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    return int(v) if v.strip().lstrip("+-").isdigit() else int(x)


def _bool(key, v):
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {v!r}")


def _list(v):
    return [s.strip() for s in v.split(",") if s.strip()]


def _build_atpf(raw: Mapping[str, str], base_dir: Path | None):
    kind = raw.get("atpf", "exponential")
    if kind == "exponential":
        return ExponentialAtpf(_float("atpf_scale", raw.get("atpf_scale", "1")))
    if kind == "disk_step":
        if "atpf_threshold" not in raw:
            raise ConfigError("atpf = disk_step needs atpf_threshold")
        return DiskStepAtpf(_float("atpf_threshold", raw["atpf_threshold"]),
                            _float("atpf_level", raw.get("atpf_level", "1")))
    if kind == "custom_table":
        if "atpf_table" not in raw:
            raise ConfigError("atpf = custom_table needs atpf_table (CSV path)")
        path = Path(raw["atpf_table"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        r_cut = _float("atpf_r_cut", raw["atpf_r_cut"]) if "atpf_r_cut" in raw else None
        mono = _bool("atpf_check_monotone", raw.get("atpf_check_monotone", "true"))
        try:
            return load_custom_table(path, check_monotone=mono, r_cut=r_cut)
        except OSError as exc:
            raise ConfigError(f"cannot read ATPF table {path}: {exc}") from None
    raise ConfigError(f"atpf must be exponential, disk_step or custom_table, got {kind!r}")


def resolve(preset: str | None, layers: list[Mapping[str, str]]) -> dict[str, str]:
    """Merge a preset with successive override layers, logging overrides."""
    merged: dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
        merged["preset"] = preset
    base = dict(merged)
    for layer in layers:
        for k, v in layer.items():
            if k in base and k != "preset" and base[k] != v:
                log.info("%s = %s overrides preset %s value %s", k, v, preset, base[k])
            merged[k] = v
    return merged


def build_config(raw: Mapping[str, str], base_dir: Path | None = None,
                 strict: bool = True) -> ExperimentConfig:
    """Validate a raw mapping and turn it into an ExperimentConfig."""
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown and strict:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    raw = {k: v for k, v in raw.items() if k in KNOWN_KEYS}

    kw: dict[str, Any] = {}
    for k in FLOAT_KEYS & set(raw) & {f.name for f in fields(Scenario)}:
        kw[k] = _float(k, raw[k])
    for k in INT_KEYS & set(raw) & {f.name for f in fields(Scenario)}:
        kw[k] = _int(k, raw[k])
    for k in BOOL_KEYS & set(raw) & {f.name for f in fields(Scenario)}:
        kw[k] = _bool(k, raw[k])
    for k in ("model", "event_window", "acf_convention"):
        if k in raw:
            kw[k] = raw[k]
    if "q" in kw and kw["q"] >= 1:
        raise ConfigError(
            f"q = {kw['q']} is not allowed: with q = 1 a device never leaves the alarm "
            "state, the chain is not ergodic and the steady-state rates are undefined. "
            "Use 0 <= q < 1."
        )
    try:
        kw["rates"] = RateParams(
            _float("rate_regular", raw.get("rate_regular", repr(SCENARIO_DEFAULTS.rates.rate_regular))),
            _float("rate_alarm", raw.get("rate_alarm", repr(SCENARIO_DEFAULTS.rates.rate_alarm))),
        )
        kw["atpf"] = _build_atpf(raw, base_dir)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    series_q = tuple(_float("series_q", v) for v in _list(raw.get("series_q", "")))
    series_models = tuple(_list(raw.get("series_models", "")))
    sweep_axis = raw.get("sweep_axis") or None
    sweep_values = tuple(_float("sweep_values", v) for v in _list(raw.get("sweep_values", "")))
    for m in series_models:
        if m not in MODELS:
            raise ConfigError(f"series_models: unknown model {m!r}")
    if sweep_axis is not None and sweep_axis not in SWEEP_AXES:
        raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {sweep_axis!r}")
    if sweep_axis is not None and not sweep_values:
        raise ConfigError("sweep_axis given without sweep_values")
    if sweep_values and sweep_axis is None:
        raise ConfigError("sweep_values given without sweep_axis")
    for v in sweep_values + series_q:
        if not math.isfinite(v):
            raise ConfigError("sweep and series values must be finite")
    if sweep_axis == "q" or series_q:
        for v in (sweep_values if sweep_axis == "q" else ()) + series_q:
            if not 0 <= v < 1:
                raise ConfigError(f"q = {v} is outside [0, 1); q = 1 makes the chain non-ergodic")
    if sweep_axis == "lambda_e" and any(v < 0 for v in sweep_values):
        raise ConfigError("lambda_e sweep values must be >= 0")

    # markov needs a q somewhere: directly, in a series, or on the sweep axis
    needs_q = kw.get("model") == "markov" or "markov" in series_models
    has_q_elsewhere = bool(series_q) or sweep_axis == "q"
    if needs_q and "q" not in kw and has_q_elsewhere:
        kw["q"] = (series_q or sweep_values)[0]
    if "model" not in kw and series_models:
        kw["model"] = series_models[0]
    if "model" in kw and kw["model"] == "markov" and "q" not in kw:
        raise ConfigError("model = markov needs q (or a q sweep / q series)")

    try:
        scenario = Scenario(**kw)
        cfg = ExperimentConfig(
            scenario=scenario,
            sweep_axis=sweep_axis,
            sweep_values=sweep_values,
            series_lambda_e=tuple(_float("series_lambda_e", v)
                                  for v in _list(raw.get("series_lambda_e", ""))),
            series_q=series_q,
            series_models=series_models,
            output=raw.get("output") or None,
            format=raw.get("format", "csv"),
            preset=raw.get("preset") or None,
            workers=_int("workers", raw.get("workers", "1")),
            atpf_table=raw.get("atpf_table"),
            raw=dict(raw),
        )
        cfg.series()  # validates every series scenario
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if any(v < 0 for v in cfg.series_lambda_e):
        raise ConfigError("series_lambda_e values must be >= 0")
    return cfg


def parse_config(source=None, overrides: Mapping[str, str] | None = None,
                 preset: str | None = None, strict: bool = True) -> ExperimentConfig:
    """Build a validated config from a file path, raw text mapping, and flag overrides.

    ``source`` may be a path, a mapping of raw values, or ``None``.  A
    ``preset`` key inside the source is honoured unless ``preset`` is given.
    """
    base_dir = None
    if source is None:
        file_raw: dict[str, str] = {}
    elif isinstance(source, Mapping):
        file_raw = {str(k).replace("-", "_"): str(v) for k, v in source.items()}
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        file_raw = read_config_text(text, str(path))
        base_dir = path.parent
    overrides = {k.replace("-", "_"): str(v) for k, v in (overrides or {}).items()}
    chosen = preset or overrides.get("preset") or file_raw.get("preset")
    layers = [{k: v for k, v in file_raw.items() if k != "preset"},
              {k: v for k, v in overrides.items() if k != "preset"}]
    raw = resolve(chosen, layers)
    return build_config(raw, base_dir=base_dir, strict=strict)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_to_raw(cfg: ExperimentConfig) -> dict[str, str]:
    """Flatten a config to explicit key/value strings (no preset indirection)."""
    sc = cfg.scenario
    out: dict[str, str] = {}
    for f in fields(Scenario):
        if f.name in ("rates", "atpf", "stream_id"):
            continue
        v = getattr(sc, f.name)
        if v is not None:
            out[f.name] = _fmt(v)
    out["rate_regular"] = _fmt(sc.rates.rate_regular)
    out["rate_alarm"] = _fmt(sc.rates.rate_alarm)
    a = sc.atpf
    if isinstance(a, ExponentialAtpf):
        out.update(atpf="exponential", atpf_scale=_fmt(a.scale))
    elif isinstance(a, DiskStepAtpf):
        out.update(atpf="disk_step", atpf_threshold=_fmt(a.threshold), atpf_level=_fmt(a.level))
    elif isinstance(a, CustomTableAtpf):
        out.update(atpf="custom_table", atpf_check_monotone=_fmt(a.check_monotone))
        if cfg.atpf_table:
            out["atpf_table"] = cfg.atpf_table
        if a.r_cut is not None:
            out["atpf_r_cut"] = _fmt(a.r_cut)
    if cfg.sweep_axis:
        out["sweep_axis"] = cfg.sweep_axis
        out["sweep_values"] = ",".join(_fmt(v) for v in cfg.sweep_values)
    if cfg.series_lambda_e:
        out["series_lambda_e"] = ",".join(_fmt(v) for v in cfg.series_lambda_e)
    if cfg.series_q:
        out["series_q"] = ",".join(_fmt(v) for v in cfg.series_q)
    if cfg.series_models:
        out["series_models"] = ",".join(cfg.series_models)
    if cfg.output:
        out["output"] = cfg.output
    out["format"] = cfg.format
    if cfg.preset:
        out["preset"] = cfg.preset
    out["workers"] = str(cfg.workers)
    return out


def format_config(cfg: ExperimentConfig) -> str:
    """Render a config as a ``key = value`` file that parses back to an equal config."""
    lines = [f"{k} = {v}" for k, v in config_to_raw(cfg).items()]
    return "\n".join(lines) + "\n"
