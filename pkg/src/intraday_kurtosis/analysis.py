"""Quote file -> per-day statistics, shared by the CLI commands."""

from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .estimators import STAT_FIELDS, DailyStats, daily_stats
from .exceptions import DegenerateDayError
from .market_data import DroppedDay, QuoteSeries, SessionConfig, prepare_days
from .timeseries import ema

SCHEMA_VERSION = 1


def schema_comment(table: str) -> str:
    return f"intraday-kurtosis {table} v{SCHEMA_VERSION}"


@dataclass
class Analysis:
    dates: list[dt.date]
    day_index: list[int]
    stats: list[DailyStats]
    dropped: list[DroppedDay] = field(default_factory=list)
    gaps: list[int] = field(default_factory=list)

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.stats], dtype=float)

    def ema_table(self, window: int = 60, names=("K", "K_b", "K0", "K0_b", "V", "moors")) -> dict[str, np.ndarray]:
        return {name: ema(self.series(name), window) for name in names}


def analyze_quotes(series: QuoteSeries, cfg: SessionConfig = SessionConfig()) -> Analysis:
    prep = prepare_days(series, cfg)
    out = Analysis([], [], [], list(prep.dropped))
    for day in prep.days:
        try:
            s = daily_stats(day)
        except DegenerateDayError as exc:
            out.dropped.append(DroppedDay(day.date, str(exc)))
            continue
        out.dates.append(day.date)
        out.day_index.append(day.day_index)
        out.stats.append(s)
        out.gaps.append(day.gaps)
    out.dropped.sort(key=lambda d: d.date)
    return out


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_csv(path, header, rows, table: str) -> None:
    with open(Path(path), "w", newline="") as fh:
        fh.write(f"# {schema_comment(table)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(Path(path)) as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    return rows[0], rows[1:]


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")


def stats_rows(dates, stats: list[DailyStats], gaps=None):
    header = ["day", "date", *STAT_FIELDS, "moors_excess", "gaps"]
    rows = []
    for i, (d, s) in enumerate(zip(dates, stats)):
        rec = s.as_dict()
        rows.append([i, d, *(rec[f] for f in STAT_FIELDS), rec["moors_excess"], gaps[i] if gaps else 0])
    return header, rows
