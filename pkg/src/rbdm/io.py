"""CSV ingestion, result files and the end-to-end analysis run."""
from __future__ import annotations

import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

import numpy as np

from .core import TimeSeries, diffuse_linear_growth, format_timestamp, log_transform
from .diagnostics import lambda_summary, rank_events, split_rhat, summarize
from .gibbs import ChainOutput, HyperParams, run_chains
from .priors import tail_comparison_table

log = logging.getLogger(__name__)


class IngestError(ValueError):
    pass


class MissingFileError(IngestError, FileNotFoundError):
    pass


class MissingColumnError(IngestError):
    pass


class DateParseError(IngestError):
    pass


class ValueParseError(IngestError):
    pass


class DuplicateDateError(IngestError):
    pass


class GapError(IngestError):
    pass


def parse_date(text, annual=False):
    parts = text.strip().split("-")
    try:
        nums = tuple(int(p) for p in parts)
    except ValueError:
        nums = ()
    if annual:
        if len(nums) != 1 or len(parts[0]) != 4:
            raise ValueError(f"expected YYYY, got {text!r}")
        return nums
    if len(nums) != 2 or len(parts[0]) != 4 or not 1 <= nums[1] <= 12:
        raise ValueError(f"expected YYYY-MM, got {text!r}")
    return nums


def _next(ts):
    if len(ts) == 1:
        return (ts[0] + 1,)
    y, m = ts
    return (y + 1, 1) if m == 12 else (y, m + 1)


def ingest_csv(path, date_col="date", value_col="value", annual=False) -> TimeSeries:
    """Read a headed CSV into a gap-free, strictly ordered series.

    Rows may come in any order; they are sorted by date. Row numbers in error
    messages count the header as row 1.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (date_col, value_col):
            if col not in header:
                raise MissingColumnError(
                    f"column {col!r} not in header {header} of {path}")
        rows = []
        for rowno, row in enumerate(reader, start=2):
            try:
                ts = parse_date(row[date_col] or "", annual)
            except ValueError as exc:
                raise DateParseError(f"row {rowno}: {exc}") from None
            raw = (row[value_col] or "").strip()
            try:
                value = float(raw)
            except ValueError:
                raise ValueParseError(
                    f"row {rowno}: value {raw!r} is not a number") from None
            if not np.isfinite(value):
                raise ValueParseError(f"row {rowno}: value {raw!r} is not finite")
            rows.append((ts, value, rowno))
    rows.sort(key=lambda r: r[0])
    for (ts0, _, r0), (ts1, _, r1) in zip(rows, rows[1:]):
        if ts0 == ts1:
            raise DuplicateDateError(
                f"rows {r0} and {r1}: duplicate date {format_timestamp(ts0)}")
        if _next(ts0) != ts1:
            raise GapError(
                f"gap after row {r0}: {format_timestamp(_next(ts0))} is missing "
                f"(next date is {format_timestamp(ts1)})")
    return TimeSeries(tuple(r[0] for r in rows), np.array([r[1] for r in rows]))


def fmt(x):
    return f"{x:.17g}"


def write_csv(path, header, columns, formatter=fmt):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([v if isinstance(v, str) else formatter(float(v)) for v in row])


def write_series_csv(path, series: TimeSeries, date_col="date", value_col="value"):
    # shortest round-trip repr keeps input data files readable
    write_csv(path, [date_col, value_col], [series.labels, series.values], repr)


def write_states(path, s):
    write_csv(path, ["t", "level_mean", "level_lo", "level_hi",
                     "slope_mean", "slope_lo", "slope_hi"],
              [s.timestamps, s.level_mean, s.level_lo, s.level_hi,
               s.slope_mean, s.slope_lo, s.slope_hi])


def write_weights(path, s):
    write_csv(path, ["t", "omega_y", "omega_level", "omega_slope"],
              [s.timestamps, s.omega_y, s.omega_level, s.omega_slope])


def write_residuals(path, s):
    write_csv(path, ["t", "residual"], [s.timestamps, s.residuals])


TAIL_GRID = np.round(np.linspace(-100.0, 100.0, 2001), 10)


def write_tails(path, grid=TAIL_GRID, beta=1.0):
    table = tail_comparison_table(grid, beta)
    write_csv(path, ["theta", "stb2", "cauchy", "normal"], list(table.T))


def read_csv_columns(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {h: [r[i] for r in body] for i, h in enumerate(header)}


@dataclass
class RunConfig:
    input: Optional[str] = None
    date_col: str = "date"
    value_col: str = "value"
    log: bool = False
    annual: bool = False
    hyper: HyperParams = field(default_factory=HyperParams)
    level: float = 0.95
    threshold: float = 0.5
    slope_threshold: Optional[float] = None
    top_k: int = 15
    out_dir: str = "rbdm_out"
    chains: int = 1
    emit_tails: bool = False

    def __post_init__(self):
        if not self.out_dir:
            raise ValueError("out_dir must be non-empty")
        if self.input is not None and not self.input:
            raise ValueError("input path must be non-empty")
        if not 0 < self.level < 1:
            raise ValueError(f"level must lie in (0, 1), got {self.level!r}")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.top_k < 1 or self.chains < 1:
            raise ValueError("top_k and chains must be at least 1")

    def to_dict(self):
        d = asdict(self)
        d["hyper"] = self.hyper.to_dict()
        return d


def _event_dict(e):
    return {"timestamp": e.timestamp, "t": e.t, "kind": e.kind,
            "omega_mean": e.omega_mean, "rank": e.rank}


def _write_chain_outputs(out, chain, series, config):
    s = summarize(chain, series, config.level, config.threshold,
                  config.slope_threshold)
    write_states(out / "states.csv", s)
    write_weights(out / "weights.csv", s)
    write_residuals(out / "residuals.csv", s)
    return s


def analyze(config: RunConfig, series: TimeSeries = None):
    """Fit the model and write every result file; returns the summary dict."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if series is None:
        if config.input is None:
            raise ValueError("no input file given")
        series = ingest_csv(config.input, config.date_col, config.value_col,
                            config.annual)
    if config.log:
        series = log_transform(series)
    spec = diffuse_linear_growth(series)
    start = time.perf_counter()
    chains = run_chains(spec, series, config.hyper, config.chains)
    runtime = time.perf_counter() - start
    if len(chains) > 1:
        for k, c in enumerate(chains):
            sub = out / f"chain_{k}"
            sub.mkdir(exist_ok=True)
            _write_chain_outputs(sub, c, series, config)
        pooled = ChainOutput.concatenate(chains)
    else:
        pooled = chains[0]
    summary = _write_chain_outputs(out, pooled, series, config)
    ranked = rank_events(summary, config.top_k)
    rhat = {"lambda_y": split_rhat([c.lambda_y for c in chains])}
    for i, name in enumerate(("lambda_level", "lambda_slope")):
        rhat[name] = split_rhat([c.lambda_theta[:, i] for c in chains])
    record = {
        "config": config.to_dict(),
        "seed": config.hyper.seed,
        "T": len(series),
        "first_timestamp": series.labels[0],
        "last_timestamp": series.labels[-1],
        "n_draws": len(pooled),
        "n_sweeps": pooled.n_sweeps,
        "ffbs_fallbacks": pooled.ffbs_fallbacks,
        "flagged_events": [_event_dict(e) for e in summary.events],
        "top_k": {fam: [{"timestamp": r.timestamp, "t": r.t,
                         "omega_mean": r.omega_mean, "rank": r.rank,
                         "flagged": r.flagged} for r in rows]
                  for fam, rows in ranked.items()},
        "lambda": lambda_summary(pooled, config.level),
        "split_rhat": rhat,
        "runtime_seconds": runtime,
    }
    if config.emit_tails:
        write_tails(out / "tails.csv")
    with open(out / "summary.json", "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return record


def run_analysis(config: RunConfig, series: TimeSeries = None) -> int:
    """CLI-facing wrapper: 0 on success, 1 with an ``error.json`` record otherwise."""
    out = Path(config.out_dir)
    try:
        analyze(config, series)
    except Exception as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("iteration", "step", "t"):
            if hasattr(exc, attr):
                record[attr] = getattr(exc, attr)
        log.error("%s: %s", record["error"], record["message"])
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "error.json", "w") as fh:
                json.dump(record, fh, indent=2)
                fh.write("\n")
        except OSError:
            pass
        print(json.dumps(record), file=sys.stderr)
        return 1
    err = out / "error.json"
    if err.exists():
        err.unlink()
    return 0
