"""Command-line entry point: ``mtc-traffic``.

Exit status is 0 on success, 2 on configuration errors and 1 on runtime
failures.
"""

from __future__ import annotations

import argparse
import logging
import sys

from mtc_traffic.config import PRESETS, parse_config
from mtc_traffic.errors import ConfigError
from mtc_traffic.results import emit_results, run_config

log = logging.getLogger("mtc_traffic")

# flag name -> config key, for every scenario scalar
SCALAR_FLAGS = {
    "--lambda-m": "lambda_m",
    "--lambda-e": "lambda_e",
    "--cell-radius": "cell_radius",
    "--rate-regular": "rate_regular",
    "--rate-alarm": "rate_alarm",
    "--atpf": "atpf",
    "--atpf-scale": "atpf_scale",
    "--atpf-threshold": "atpf_threshold",
    "--atpf-level": "atpf_level",
    "--atpf-table": "atpf_table",
    "--atpf-r-cut": "atpf_r_cut",
    "--model": "model",
    "--q": "q",
    "--event-window": "event_window",
    "--epsilon": "epsilon",
    "--window-extent": "window_extent",
    "--device-count": "device_count",
    "--max-lag": "max_lag",
    "--acf-convention": "acf_convention",
    "--packetize": "packetize",
    "--sweep-axis": "sweep_axis",
    "--sweep-values": "sweep_values",
    "--series-lambda-e": "series_lambda_e",
    "--series-q": "series_q",
    "--series-models": "series_models",
    "--workers": "workers",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mtc-traffic", description="Monte Carlo runs of the spatial MTC traffic model.")
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", metavar="U64")
    p.add_argument("--out", metavar="PATH", help="output file")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--trials", metavar="N", help="number of Monte Carlo trials")
    p.add_argument("--slots", metavar="N", help="number of time slots per trial")
    p.add_argument("--lenient", action="store_true", help="ignore unknown config keys")
    p.add_argument("-v", "--verbose", action="store_true")
    for flag, key in SCALAR_FLAGS.items():
        p.add_argument(flag, dest=key, metavar=key.upper())
    return p


def overrides_from_args(args) -> dict[str, str]:
    out = {}
    for key in SCALAR_FLAGS.values():
        v = getattr(args, key)
        if v is not None:
            out[key] = v
    for attr, key in (("seed", "seed"), ("out", "output"), ("format", "format"),
                      ("trials", "n_trials"), ("slots", "n_slots")):
        v = getattr(args, attr)
        if v is not None:
            out[key] = v
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config, overrides_from_args(args), preset=args.preset,
                           strict=not args.lenient)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        results = run_config(cfg)
        paths = emit_results(results, cfg)
    except Exception as exc:  # noqa: BLE001 - report any runtime failure with exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for r in results:
        for st in r.stats:
            if st.error:
                print(f"warning: sweep point {st.axis_value!r} in series {r.label!r} failed: "
                      f"{st.error}", file=sys.stderr)
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
