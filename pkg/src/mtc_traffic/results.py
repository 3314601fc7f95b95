"""Running a configured experiment and writing CSV / JSON results."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

from mtc_traffic.config import ExperimentConfig, config_to_raw
from mtc_traffic.sim_engine import SummaryStats, run_experiment, sweep

SCHEMA_VERSION = 1

RATE_COLUMNS = ("series", "axis_value", "mc_mean", "mc_stderr", "closed_form",
                "approx_markov", "n_trials", "n_slots")
ACF_COLUMNS = ("series", "lag", "acf_mean", "acf_stderr")


@dataclass(frozen=True)
class SeriesResult:
    label: str
    stats: list[SummaryStats]


def run_config(cfg: ExperimentConfig) -> list[SeriesResult]:
    out = []
    for label, sc in cfg.series():
        if cfg.sweep_axis:
            stats = sweep(sc, cfg.sweep_axis, cfg.sweep_values, workers=cfg.workers)
        else:
            stats = [run_experiment(sc, workers=cfg.workers)]
        out.append(SeriesResult(label, stats))
    return out


def _num(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return None
    return float(v)


def rate_rows(results: list[SeriesResult]) -> list[dict]:
    rows = []
    for res in results:
        for st in res.stats:
            rows.append({
                "series": res.label,
                "axis_value": _num(st.axis_value),
                "mc_mean": _num(st.mean_rate),
                "mc_stderr": _num(st.std_error) if st.stderr_defined else None,
                "closed_form": _num(st.closed_form.value) if st.closed_form else None,
                "approx_markov": _num(st.approx_markov),
                "n_trials": st.n_trials,
                "n_slots": st.n_slots,
            })
    return rows


def acf_rows(results: list[SeriesResult]) -> list[dict]:
    rows = []
    for res in results:
        for st in res.stats:
            if st.acf is None:
                continue
            label = res.label
            if len(res.stats) > 1 and st.axis_value is not None:
                label = f"{label};axis={st.axis_value!r}" if label else f"axis={st.axis_value!r}"
            for i, lag in enumerate(st.acf.lags):
                err = st.acf.stderr[i] if st.acf.stderr is not None else None
                rows.append({"series": label, "lag": int(lag),
                             "acf_mean": float(st.acf.values[i]), "acf_stderr": _num(err)})
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def acf_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_acf{path.suffix}")


def emit_results(results: list[SeriesResult], cfg: ExperimentConfig,
                 path: str | Path | None = None) -> list[Path]:
    """Write results to ``path`` (or ``cfg.output``) and return the files written.

    CSV output writes the rate table to ``path`` and, when any series carries
    an ACF, the ACF table to ``<stem>_acf.csv`` next to it.  JSON writes one
    document holding both tables and the flattened config.
    """
    if not results or not any(r.stats for r in results):
        raise ValueError("nothing to emit: no results")
    target = Path(path or cfg.output or f"results.{cfg.format}")
    rates = rate_rows(results)
    acfs = acf_rows(results)
    written = []
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        if cfg.format == "json":
            doc = {"schema_version": SCHEMA_VERSION, "config": config_to_raw(cfg),
                   "columns": list(RATE_COLUMNS), "results": rates}
            if acfs:
                doc["acf_columns"] = list(ACF_COLUMNS)
                doc["acf"] = acfs
            target.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n")
            written.append(target)
        else:
            with open(target, "w", newline="") as fh:
                fh.write(to_csv(rates, RATE_COLUMNS))
            written.append(target)
            if acfs:
                ap = acf_path(target)
                with open(ap, "w", newline="") as fh:
                    fh.write(to_csv(acfs, ACF_COLUMNS))
                written.append(ap)
    except OSError as exc:
        raise OSError(f"failed to write results to {target}: {exc}") from exc
    return written
