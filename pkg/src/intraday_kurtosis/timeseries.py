"""Day-indexed series: autocorrelation, exponential moving average, windowed correlation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, DataError, ParseError


@dataclass
class DaySeries:
    values: np.ndarray
    label: str = "value"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    @property
    def ntd(self) -> int:
        return len(self.values)

    def to_csv(self, path, header_comment: str | None = None) -> None:
        with open(Path(path), "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("day_index", self.label))
            for i, v in enumerate(self.values):
                w.writerow((i, repr(float(v))))

    @classmethod
    def from_csv(cls, path, column: str | None = None) -> "DaySeries":
        """Read ``day_index,value`` CSV (lines starting with ``#`` are skipped)."""
        with open(Path(path)) as fh:
            reader = csv.reader(line for line in fh if not line.startswith("#"))
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty series file") from None
            col = header.index(column) if column else 1
            if column is None and len(header) < 2:
                raise ParseError(f"{path}: expected day_index,value columns")
            vals = []
            for i, row in enumerate(reader, 2):
                try:
                    vals.append(float(row[col]))
                except (IndexError, ValueError):
                    raise ParseError(f"{path}: bad value", i) from None
        return cls(np.array(vals), header[col])


def _values(s) -> np.ndarray:
    return np.asarray(getattr(s, "values", s), dtype=float)


def autocorr_noncentered(s, max_lag: int, centered: bool = False) -> np.ndarray:
    """``C_t = mean_i(s_i s_{i+t}) / mean_i(s_i**2)`` for ``t = 0..max_lag``.

    The numerator at lag ``t`` averages the ``ntd - t`` available products.
    No mean is removed unless ``centered`` is set.
    """
    x = _values(s)
    n = x.size
    if not 0 <= max_lag < n:
        raise ConfigError(f"max_lag must be in [0, {n - 1}]")
    if centered:
        x = x - x.mean()
    denom = np.mean(x * x)
    if denom == 0:
        raise DataError("autocorrelation undefined for an all-zero series")
    out = np.empty(max_lag + 1)
    for t in range(max_lag + 1):
        out[t] = np.dot(x[: n - t], x[t:]) / (n - t)
    out /= denom
    out[0] = 1.0
    return out


def ema_weights(window: int) -> np.ndarray:
    k = np.arange(window + 1)
    return np.exp(-k / window)


def ema_noise_factor(window: int = 60) -> float:
    """Standard deviation of ``ema`` of unit-variance iid noise (full kernel)."""
    w = ema_weights(window)
    return float(np.sqrt(np.sum(w * w)) / np.sum(w))


def ema(s, window: int = 60) -> np.ndarray:
    """Truncated exponential moving average.

    ``f_ma(t) = sum_{k=0..window} w_k f(t-k) / sum w_k`` with
    ``w_k = exp(-k / window)``; before ``t = window`` only the available
    terms enter and the weights are renormalized.
    """
    if window < 1:
        raise ConfigError("ema window must be >= 1")
    x = _values(s)
    if x.size == 0:
        raise DataError("empty series")
    w = ema_weights(window)
    num = np.convolve(x, w)[: x.size]
    den = np.convolve(np.ones_like(x), w)[: x.size]
    return num / den


def windowed_correlation(a, b, window: int = 600, stride: int | None = None) -> np.ndarray:
    """Pearson correlation over contiguous windows.

    Windows are disjoint by default (``stride = window``); a trailing
    incomplete window is ignored. Windows where either series is constant
    give NaN.
    """
    x, y = _values(a), _values(b)
    if x.size != y.size:
        raise DataError("series lengths differ")
    if not 1 < window <= x.size:
        raise ConfigError(f"window must be in [2, {x.size}]")
    stride = stride or window
    if stride < 1:
        raise ConfigError("stride must be positive")
    out = []
    for s in range(0, x.size - window + 1, stride):
        u = x[s : s + window] - x[s : s + window].mean()
        v = y[s : s + window] - y[s : s + window].mean()
        den = np.sqrt(np.dot(u, u) * np.dot(v, v))
        out.append(np.clip(np.dot(u, v) / den, -1.0, 1.0) if den > 0 else np.nan)
    return np.array(out)


def window_starts(n: int, window: int, stride: int | None = None) -> list[int]:
    return list(range(0, n - window + 1, stride or window))
