"""Command-line front door: batch extraction and benchmark-grid reports.

Subcommands:
  extract   audio files -> binary mel feature files (one per input)
  cost      MAC/storage table over selected configurations
  adapt     pooling plan lookup for one configuration
  evaluate  prediction/label CSVs -> macro metric summary
  grid      list the selected configurations
  report    cost table joined with the published-results reference table

All report output is deterministic: rows are sorted by (sample_rate,
n_mels descending, hop ascending, compression), floats are formatted at
6 significant digits, and worker count never changes output bytes.
Selectors default to the benchmark grid; off-grid values are honored
with a warning unless --grid-strict is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import dsp
from .arch import ARCH_NAMES, SweepEntry, grid_cost_sweep, vgg_pooling_plan
from .exceptions import (
    EmptySummaryError,
    MelGaugeError,
    SchemaError,
    UnsupportedConfigError,
)
from .mel import (
    COMPRESSIONS,
    GRID_BASE_HOP_MELS,
    GRID_FULL_HOP_MELS,
    GRID_HOP_MULTIPLIERS,
    GRID_SAMPLE_RATES,
    MelConfig,
    benchmark_frames,
    is_grid_config,
    mel_spectrogram,
    write_mspec,
)
from .metrics import load_tag_table, macro_summary, summary_to_csv, summary_to_json
from .reference import SOURCE_LABEL, published_for_config

__all__ = ["main"]

_GRID_MELS = GRID_FULL_HOP_MELS + GRID_BASE_HOP_MELS


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _default_workers() -> int:
    raw = os.environ.get("MELGAUGE_WORKERS", "1")
    try:
        value = int(raw)
    except ValueError:
        value = 1
    return max(value, 1)


def _write_out(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


# ------------------------------------------------------------- selection

def _select_configs(args) -> list[MelConfig]:
    """Expand selector flags into an ordered configuration list.

    Defaults reproduce the benchmark grid (mel counts below 48 only at
    the base hop). Explicit flag values are honored verbatim, which can
    leave the grid; each off-grid config warns on construction.
    """
    rates = args.sample_rate or list(GRID_SAMPLE_RATES)
    mels = args.mels or list(_GRID_MELS)
    comps = args.compression or list(COMPRESSIONS)
    configs: list[MelConfig] = []
    for rate in sorted(set(rates)):
        for mel_count in sorted(set(mels), reverse=True):
            if args.hop_mult:
                hops = sorted(set(args.hop_mult))
            elif mel_count in GRID_FULL_HOP_MELS:
                hops = list(GRID_HOP_MULTIPLIERS)
            else:
                hops = [1]  # grid restriction, also the off-grid default
            for hop in hops:
                for comp in comps:
                    configs.append(
                        MelConfig(rate, mel_count, hop_multiplier=hop, compression=comp)
                    )
    if getattr(args, "grid_strict", False):
        for config in configs:
            if not is_grid_config(
                config.sample_rate, config.n_mels, config.hop_multiplier
            ):
                raise UnsupportedConfigError(
                    f"--grid-strict: {config.config_id} is outside the benchmark grid"
                )
    return configs


def _compression_sorted(compressions) -> list[str]:
    return sorted(compressions)  # "dB" before "log"


# ------------------------------------------------------------------ cost

def _baseline_report(arch: str, sample_rate: int):
    """Cost of the (96 mels, x1) reference point at one sample rate."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            config = MelConfig(sample_rate, 96, hop_multiplier=1)
        [entry] = grid_cost_sweep(arch, [config])
        return entry.report
    except MelGaugeError:
        return None


def _cost_rows(arch: str, configs: list[MelConfig]) -> list[dict]:
    entries = grid_cost_sweep(arch, configs)
    entries.sort(
        key=lambda e: (
            e.config.sample_rate,
            -e.config.n_mels,
            e.config.hop_multiplier,
            e.config.compression,
        )
    )
    baselines = {
        rate: _baseline_report(arch, rate)
        for rate in {e.config.sample_rate for e in entries}
    }
    rows = []
    for entry in entries:
        config = entry.config
        row = {
            "config_id": config.config_id,
            "sample_rate": config.sample_rate,
            "n_mels": config.n_mels,
            "hop_multiplier": config.hop_multiplier,
            "compression": config.compression,
        }
        if entry.report is None:
            row["error"] = entry.error
        else:
            report = entry.report
            row["total_macs"] = report.total_macs
            row["gmacs"] = report.gmacs
            row["feature_bytes"] = report.feature_bytes
            row["approximate"] = ";".join(report.approximate_layers)
            baseline = baselines[config.sample_rate]
            if baseline is not None:
                row["gmacs_ratio"] = report.total_macs / baseline.total_macs
                row["bytes_ratio"] = report.feature_bytes / baseline.feature_bytes
        rows.append(row)
    return rows


_COST_COLUMNS = (
    "config_id",
    "sample_rate",
    "n_mels",
    "hop_multiplier",
    "compression",
    "total_macs",
    "gmacs",
    "gmacs_ratio",
    "feature_bytes",
    "bytes_ratio",
    "approximate",
    "error",
)


def _rows_to_csv(rows: list[dict], columns) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        cells = []
        for column in columns:
            value = row.get(column)
            if value is None:
                cells.append("")
            elif isinstance(value, float):
                cells.append(_fmt(value))
            else:
                cells.append(str(value))
        writer.writerow(cells)
    return buffer.getvalue()


def _rows_to_json(rows: list[dict]) -> str:
    cleaned = []
    for row in rows:
        out = {}
        for key, value in row.items():
            if isinstance(value, float):
                out[key] = float(_fmt(value))
            else:
                out[key] = value
        cleaned.append(out)
    return json.dumps(cleaned, indent=2) + "\n"


def cmd_cost(args) -> int:
    configs = _select_configs(args)
    if not configs:
        print("error: empty configuration selection", file=sys.stderr)
        return 2
    rows = _cost_rows(args.arch, configs)
    if args.format == "json":
        text = _rows_to_json(rows)
    else:
        text = _rows_to_csv(rows, _COST_COLUMNS)
    _write_out(text, args.out)
    return 0 if all("error" not in row for row in rows) else 1


# ---------------------------------------------------------------- report

_REPORT_COLUMNS = (
    "config_id",
    "sample_rate",
    "n_mels",
    "hop_multiplier",
    "compression",
    "gmacs",
    "feature_bytes",
    "approximate",
    "dataset",
    "published_roc",
    "published_pr",
    "published_source",
    "error",
)


def cmd_report(args) -> int:
    configs = _select_configs(args)
    if not configs:
        print("error: empty configuration selection", file=sys.stderr)
        return 2
    cost_rows = _cost_rows(args.arch, configs)
    by_id = {config.config_id: config for config in configs}
    rows = []
    failed = False
    for cost in cost_rows:
        base = {
            key: cost.get(key)
            for key in (
                "config_id",
                "sample_rate",
                "n_mels",
                "hop_multiplier",
                "compression",
                "gmacs",
                "feature_bytes",
                "approximate",
                "error",
            )
        }
        if "error" in cost:
            failed = True
        published = published_for_config(by_id[cost["config_id"]], args.arch)
        if not published:
            rows.append(base)
            continue
        for result in published:
            row = dict(base)
            row["dataset"] = result.dataset
            row["published_roc"] = result.roc_auc
            row["published_pr"] = result.pr_auc
            row["published_source"] = SOURCE_LABEL
            rows.append(row)
    if args.format == "json":
        text = _rows_to_json(rows)
    else:
        text = _rows_to_csv(rows, _REPORT_COLUMNS)
    _write_out(text, args.out)
    return 1 if failed else 0


# ------------------------------------------------------------------ grid

_GRID_COLUMNS = (
    "config_id",
    "sample_rate",
    "n_mels",
    "hop_multiplier",
    "compression",
    "n_frames",
)


def cmd_grid(args) -> int:
    configs = _select_configs(args)
    if not configs:
        print("error: empty configuration selection", file=sys.stderr)
        return 2
    configs.sort(
        key=lambda c: (c.sample_rate, -c.n_mels, c.hop_multiplier, c.compression)
    )
    rows = []
    for config in configs:
        row = {
            "config_id": config.config_id,
            "sample_rate": config.sample_rate,
            "n_mels": config.n_mels,
            "hop_multiplier": config.hop_multiplier,
            "compression": config.compression,
        }
        try:
            row["n_frames"] = benchmark_frames(config.sample_rate, config.hop_multiplier)
        except ValueError:
            pass
        rows.append(row)
    if args.format == "json":
        text = _rows_to_json(rows)
    else:
        text = _rows_to_csv(rows, _GRID_COLUMNS)
    _write_out(text, args.out)
    return 0


# ----------------------------------------------------------------- adapt

def cmd_adapt(args) -> int:
    try:
        plan = vgg_pooling_plan(args.mels, args.hop_mult, args.sample_rate)
    except UnsupportedConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.format == "json":
        data = {
            "sample_rate": args.sample_rate,
            "n_mels": args.mels,
            "hop_multiplier": args.hop_mult,
            "freq_pools": list(plan.freq_pools),
            "time_pools": list(plan.time_pools),
        }
        _write_out(json.dumps(data, indent=2) + "\n", args.out)
    else:
        time_text = ",".join(str(p) for p in plan.time_pools)
        freq_text = ",".join(str(p) for p in plan.freq_pools)
        _write_out(f"time: {time_text} freq: {freq_text}\n", args.out)
    return 0


# -------------------------------------------------------------- evaluate

def cmd_evaluate(args) -> int:
    try:
        table = load_tag_table(args.predictions, args.labels)
        summary = macro_summary(table)
    except (SchemaError, EmptySummaryError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.format == "csv":
        text = summary_to_csv(summary)
    else:
        text = summary_to_json(summary)
    _write_out(text, args.out)
    return 0


# --------------------------------------------------------------- extract

def _extract_one(input_path: str, config: MelConfig, out_dir: Path, input_rate: int | None):
    path = Path(input_path)
    if path.suffix.lower() == ".wav":
        audio = dsp.read_wav_mono(path)
    else:
        rate = input_rate if input_rate is not None else config.sample_rate
        audio = dsp.read_raw_float32(path, rate)
    if audio.sample_rate != config.sample_rate:
        audio = dsp.resample_rational(audio, config.sample_rate)
    mel = mel_spectrogram(audio, config)
    out_path = out_dir / (path.stem + ".mspec")
    n_bytes = write_mspec(out_path, mel)
    return out_path, n_bytes


def cmd_extract(args) -> int:
    if not args.inputs:
        print("warning: no input files given", file=sys.stderr)
        return 0
    config = MelConfig(
        args.sample_rate,
        args.mels,
        hop_multiplier=args.hop_mult,
        compression=args.compression,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def work(input_path: str):
        try:
            out_path, n_bytes = _extract_one(input_path, config, out_dir, args.input_rate)
            return input_path, f"wrote {out_path} ({n_bytes} bytes)", None
        except (MelGaugeError, OSError, ValueError) as exc:
            return input_path, None, str(exc)

    workers = max(args.workers, 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(work, args.inputs))  # map preserves input order
    failures = 0
    for input_path, message, error in results:
        if error is None:
            print(message)
        else:
            failures += 1
            print(f"error: {input_path}: {error}", file=sys.stderr)
    return 1 if failures else 0


# ----------------------------------------------------------------- parser

def _add_selector_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--sample-rate", type=int, action="append",
        help="sample rate in Hz; repeatable (default: 12000 and 16000)",
    )
    parser.add_argument(
        "--mels", type=int, action="append",
        help="mel band count; repeatable (default: the benchmark counts)",
    )
    parser.add_argument(
        "--hop-mult", type=int, action="append",
        help="hop multiplier over 256 samples; repeatable (default: grid hops)",
    )
    parser.add_argument(
        "--compression", choices=COMPRESSIONS, action="append",
        help="magnitude compression; repeatable (default: both)",
    )
    parser.add_argument(
        "--grid-strict", action="store_true",
        help="fail instead of warning when a selector leaves the benchmark grid",
    )


def _add_output_flags(parser: argparse.ArgumentParser, default_format: str = "csv") -> None:
    parser.add_argument(
        "--format", choices=("csv", "json"), default=default_format,
        help=f"output format (default: {default_format})",
    )
    parser.add_argument("--out", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="melgauge",
        description="Mel front-end cost, shape, and evaluation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="extract mel features to .mspec files")
    p_extract.add_argument("inputs", nargs="*", help="input audio files (.wav or raw float32)")
    p_extract.add_argument("--sample-rate", type=int, required=True,
                           help="analysis sample rate in Hz")
    p_extract.add_argument("--mels", type=int, required=True, help="mel band count")
    p_extract.add_argument("--hop-mult", type=int, default=1,
                           help="hop multiplier over 256 samples (default: 1)")
    p_extract.add_argument("--compression", choices=COMPRESSIONS, default="dB",
                           help="magnitude compression (default: dB)")
    p_extract.add_argument("--out-dir", required=True, help="output directory")
    p_extract.add_argument("--input-rate", type=int,
                           help="sample rate of raw float32 inputs (default: analysis rate)")
    p_extract.add_argument("--workers", type=int, default=_default_workers(),
                           help="parallel workers (default: MELGAUGE_WORKERS or 1)")
    p_extract.set_defaults(func=cmd_extract)

    p_cost = sub.add_parser("cost", help="MAC and storage cost table")
    p_cost.add_argument("--arch", choices=ARCH_NAMES, default="vgg-cnn",
                        help="architecture to cost (default: vgg-cnn)")
    _add_selector_flags(p_cost)
    _add_output_flags(p_cost)
    p_cost.set_defaults(func=cmd_cost)

    p_adapt = sub.add_parser("adapt", help="pooling plan for one configuration")
    p_adapt.add_argument("--mels", type=int, required=True, help="mel band count")
    p_adapt.add_argument("--hop-mult", type=int, required=True, help="hop multiplier")
    p_adapt.add_argument("--sample-rate", type=int, required=True, help="sample rate in Hz")
    _add_output_flags(p_adapt, default_format="text")
    p_adapt.set_defaults(func=cmd_adapt)
    # adapt's default format is plain text; csv is not meaningful here
    for action in p_adapt._actions:
        if action.dest == "format":
            action.choices = ("text", "json")

    p_eval = sub.add_parser("evaluate", help="macro metrics from prediction/label CSVs")
    p_eval.add_argument("predictions", help="predictions CSV (tag header + one row per item)")
    p_eval.add_argument("labels", help="labels CSV with the same header")
    _add_output_flags(p_eval, default_format="json")
    p_eval.set_defaults(func=cmd_evaluate)

    p_grid = sub.add_parser("grid", help="list benchmark grid configurations")
    _add_selector_flags(p_grid)
    _add_output_flags(p_grid)
    p_grid.set_defaults(func=cmd_grid)

    p_report = sub.add_parser("report", help="cost table joined with published results")
    p_report.add_argument("--arch", choices=ARCH_NAMES, default="vgg-cnn",
                          help="architecture to cost (default: vgg-cnn)")
    _add_selector_flags(p_report)
    _add_output_flags(p_report)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MelGaugeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
