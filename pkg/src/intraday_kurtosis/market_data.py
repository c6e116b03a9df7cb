"""Intraday quote ingestion and session handling.

Quotes come in as ``date,time,price`` CSV (optionally gzipped) or as
one-day-per-record JSON. They are turned into per-day log returns, the
session edges are trimmed and abnormally short sessions are dropped.
"""

from __future__ import annotations

import csv
import datetime as dt
import gzip
import io
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .exceptions import (
    DataError,
    InsufficientPeriodsError,
    ParseError,
    ShortSessionError,
    ConfigError,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ("date", "time", "price")
GZIP_MAGIC = b"\x1f\x8b"


@dataclass
class QuoteDay:
    date: dt.date
    times: list[dt.time]
    prices: np.ndarray

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=float)
        if len(self.times) != len(self.prices):
            raise DataError(f"{self.date}: {len(self.times)} times for {len(self.prices)} prices")
        if np.any(~(self.prices > 0)):
            raise DataError(f"{self.date}: prices must be strictly positive")
        for t0, t1 in zip(self.times, self.times[1:]):
            if not t1 > t0:
                raise DataError(f"{self.date}: timestamps not strictly increasing at {t1}")


@dataclass
class QuoteSeries:
    """Intraday quotations grouped by trading date, dates strictly increasing."""

    days: list[QuoteDay]

    def __post_init__(self):
        for d0, d1 in zip(self.days, self.days[1:]):
            if not d1.date > d0.date:
                raise DataError(f"dates not strictly increasing: {d0.date} then {d1.date}")

    def __len__(self):
        return len(self.days)

    @property
    def n_quotes(self) -> int:
        return sum(len(d.prices) for d in self.days)


@dataclass
class TradingDay:
    """One day of log returns.

    ``positions`` holds the original intraday period index of every
    return, so slot identity survives trimming and midday removal.
    """

    day_index: int
    date: dt.date
    returns: np.ndarray
    positions: np.ndarray = None
    gaps: int = 0

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        if self.positions is None:
            self.positions = np.arange(len(self.returns))
        self.positions = np.asarray(self.positions, dtype=int)
        if len(self.positions) != len(self.returns):
            raise DataError("positions and returns differ in length")

    @property
    def n_periods(self) -> int:
        return len(self.returns)


@dataclass(frozen=True)
class DroppedDay:
    date: dt.date
    reason: str


@dataclass(frozen=True)
class SessionConfig:
    bar_interval: dt.timedelta = dt.timedelta(minutes=5)
    trim: dt.timedelta = dt.timedelta(minutes=60)
    min_periods: int = 40

    def __post_init__(self):
        if self.bar_interval <= dt.timedelta(0):
            raise ConfigError("bar_interval must be positive")
        if self.trim < dt.timedelta(0):
            raise ConfigError("trim must be non-negative")
        if self.trim % self.bar_interval:
            raise ConfigError(f"trim {self.trim} is not a whole number of {self.bar_interval} bars")
        if self.min_periods < 0:
            raise ConfigError("min_periods must be non-negative")

    @property
    def trim_bars(self) -> int:
        return self.trim // self.bar_interval


# --------------------------------------------------------------------------
# parsing


def _maybe_decompress(data: bytes) -> bytes:
    if data[:2] == GZIP_MAGIC:
        return gzip.decompress(data)
    return data


def _parse_date(text, line):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"bad date {text!r}", line) from None


def _parse_time(text, line):
    try:
        return dt.time.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"bad time {text!r}", line) from None


def _parse_price(value, line):
    try:
        price = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"bad price {value!r}", line) from None
    if not np.isfinite(price):
        raise ParseError(f"non-finite price {value!r}", line)
    if price <= 0:
        raise DataError(f"price {value!r} is not positive (log undefined)", line)
    return price


def _parse_csv(text: str) -> QuoteSeries:
    reader = csv.reader(io.StringIO(text))
    header = None
    days: list[QuoteDay] = []
    cur_date = None
    times: list[dt.time] = []
    prices: list[float] = []
    seen: set[dt.date] = set()

    def flush():
        if cur_date is not None:
            days.append(QuoteDay(cur_date, times, np.array(prices)))

    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()) or row[0].startswith("#"):
            continue
        if header is None:
            header = tuple(c.strip().lower() for c in row)
            if header != CSV_HEADER:
                raise ParseError(f"expected header {','.join(CSV_HEADER)}, got {','.join(row)}", line)
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line)
        date = _parse_date(row[0], line)
        time = _parse_time(row[1], line)
        price = _parse_price(row[2], line)
        if date != cur_date:
            if cur_date is not None and date < cur_date or date in seen:
                raise DataError(f"date {date} out of order", line)
            flush()
            seen.add(date)
            cur_date, times, prices = date, [], []
        elif times and not time > times[-1]:
            raise DataError(f"timestamp {time} not after {times[-1]}", line)
        times.append(time)
        prices.append(price)
    if header is None:
        raise ParseError("empty input: header row required", 1)
    flush()
    return QuoteSeries(days)


def _json_records(text: str):
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            records = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
        for i, rec in enumerate(records, 1):
            yield i, rec
        return
    for i, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        try:
            yield i, json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", i) from None


def _parse_json(text: str) -> QuoteSeries:
    days = []
    for line, rec in _json_records(text):
        if not isinstance(rec, dict) or "date" not in rec or "prices" not in rec:
            raise ParseError("record needs 'date' and 'prices'", line)
        date = _parse_date(str(rec["date"]), line)
        prices = [_parse_price(p, line) for p in rec["prices"]]
        if "times" in rec:
            times = [_parse_time(str(t), line) for t in rec["times"]]
            if len(times) != len(prices):
                raise ParseError("'times' and 'prices' differ in length", line)
        else:
            start = _parse_time(str(rec.get("start", "09:30")), line)
            step = dt.timedelta(minutes=float(rec.get("interval_minutes", 5)))
            base = dt.datetime.combine(date, start)
            times = [(base + k * step).time() for k in range(len(prices))]
        if days and date <= days[-1].date:
            raise DataError(f"date {date} out of order", line)
        try:
            days.append(QuoteDay(date, times, np.array(prices)))
        except DataError as exc:
            raise DataError(str(exc), line) from None
    return QuoteSeries(days)


def parse_quotes(data: bytes | BinaryIO, fmt: str = "csv") -> QuoteSeries:
    """Parse a quote file.

    Parameters
    ----------
    data : bytes or binary file object
        Raw file content, plain or gzip-compressed (detected by magic bytes).
    fmt : {"csv", "json"}
        ``csv`` expects a ``date,time,price`` header. ``json`` accepts a JSON
        array or JSON Lines of ``{"date", "prices", ["times" | "start",
        "interval_minutes"]}`` records.

    Raises
    ------
    ParseError
        Malformed rows; the message carries the line number.
    DataError
        Non-positive prices or out-of-order dates/timestamps.
    """
    if not isinstance(data, (bytes, bytearray)):
        data = data.read()
    text = _maybe_decompress(bytes(data)).decode("utf-8-sig")
    if fmt == "csv":
        return _parse_csv(text)
    if fmt in ("json", "jsonl"):
        return _parse_json(text)
    raise ConfigError(f"unknown quote format {fmt!r}")


def infer_format(path) -> str:
    suffixes = [s.lower() for s in Path(path).suffixes if s.lower() != ".gz"]
    if suffixes and suffixes[-1] in (".json", ".jsonl"):
        return "json"
    return "csv"


def read_quotes(path, fmt: str | None = None) -> QuoteSeries:
    path = Path(path)
    with open(path, "rb") as fh:
        return parse_quotes(fh, fmt or infer_format(path))


def write_quotes_csv(series: QuoteSeries, path) -> None:
    """Write ``series`` as CSV; gzip when the path ends in ``.gz``.

    Prices are written with ``repr`` so they reload bit-identically.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for day in series.days:
        d = day.date.isoformat()
        for t, p in zip(day.times, day.prices):
            w.writerow((d, t.strftime("%H:%M") if not t.second else t.isoformat(), repr(float(p))))
    raw = buf.getvalue().encode()
    path = Path(path)
    if path.suffix == ".gz":
        # mtime and stored name pinned: bytes depend on content only
        with open(path, "wb") as fh, gzip.GzipFile(filename="", fileobj=fh, mode="wb", mtime=0) as gz:
            gz.write(raw)
    else:
        path.write_bytes(raw)


# --------------------------------------------------------------------------
# returns and sessions


def _minutes(t: dt.time) -> float:
    return t.hour * 60 + t.minute + t.second / 60


def compute_returns(
    series: QuoteSeries, bar_interval: dt.timedelta | None = None
) -> tuple[list[TradingDay], list[DroppedDay]]:
    """Log returns per day, ``r_j = log q_{j+1} - log q_j``.

    A gap longer than ``bar_interval`` yields one return spanning the gap
    and increments ``TradingDay.gaps``. Days with fewer than two quotes are
    excluded and reported.
    """
    days, dropped = [], []
    bar = bar_interval.total_seconds() / 60 if bar_interval else None
    for i, qd in enumerate(series.days):
        if len(qd.prices) < 2:
            dropped.append(DroppedDay(qd.date, f"only {len(qd.prices)} quote(s)"))
            continue
        r = np.diff(np.log(qd.prices))
        gaps = 0
        if bar is not None:
            steps = np.diff([_minutes(t) for t in qd.times])
            gaps = int(np.sum(steps > bar + 1e-9))
            if gaps:
                logger.info("%s: %d gap(s) in the bar grid", qd.date, gaps)
        days.append(TradingDay(i, qd.date, r, gaps=gaps))
    return days, dropped


def trim_session(day: TradingDay, cfg: SessionConfig) -> TradingDay:
    """Drop ``cfg.trim_bars`` returns from each end of the session."""
    k = cfg.trim_bars
    if k == 0:
        return day
    if day.n_periods <= 2 * k:
        raise ShortSessionError(
            f"{day.date}: {day.n_periods} periods, cannot trim {k} from each edge"
        )
    return replace(day, returns=day.returns[k:-k], positions=day.positions[k:-k])


def filter_short_sessions(
    days: Iterable[TradingDay], cfg: SessionConfig
) -> tuple[list[TradingDay], list[TradingDay]]:
    kept, dropped = [], []
    for day in days:
        (dropped if day.n_periods < cfg.min_periods else kept).append(day)
    return kept, dropped


def midday_drop_indices(n: int, k: int) -> np.ndarray:
    """Indices of the ``k`` periods closest to the session midpoint.

    Removal is symmetric around the midpoint; an unpaired removal goes to
    the later index.
    """
    mid = (n - 1) / 2
    order = sorted(range(n), key=lambda j: (abs(j - mid), -j))
    return np.sort(np.array(order[:k], dtype=int))


def uniformize_periods(day: TradingDay, target: int = 71) -> TradingDay:
    n = day.n_periods
    if n < target:
        raise InsufficientPeriodsError(f"{day.date}: {n} periods < target {target}")
    if n == target:
        return day
    if target < 2:
        raise ConfigError("target must keep both session edges (>= 2)")
    keep = np.ones(n, dtype=bool)
    keep[midday_drop_indices(n, n - target)] = False
    return replace(day, returns=day.returns[keep], positions=day.positions[keep])


@dataclass
class PreparedDays:
    days: list[TradingDay]
    dropped: list[DroppedDay] = field(default_factory=list)


def prepare_days(
    series: QuoteSeries, cfg: SessionConfig, uniformize_to: int | None = None
) -> PreparedDays:
    """Returns, optional midday uniformization, edge trimming, short-session filter."""
    days, dropped = compute_returns(series, cfg.bar_interval)
    out = []
    for day in days:
        try:
            if uniformize_to is not None:
                day = uniformize_periods(day, uniformize_to)
            out.append(trim_session(day, cfg))
        except DataError as exc:
            dropped.append(DroppedDay(day.date, str(exc)))
    kept, short = filter_short_sessions(out, cfg)
    dropped.extend(
        DroppedDay(d.date, f"short session: {d.n_periods} < {cfg.min_periods} periods") for d in short
    )
    dropped.sort(key=lambda d: d.date)
    return PreparedDays(kept, dropped)
