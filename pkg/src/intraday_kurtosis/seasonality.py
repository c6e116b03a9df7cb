"""Intraday volatility profile and the p-kurtosis it induces."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .estimators import normalize_mean_abs
from .exceptions import DataError
from .market_data import TradingDay


@dataclass
class IntradayProfile:
    slot_means: np.ndarray
    day_range: tuple[int, int]
    n_days: int
    positions: np.ndarray | None = None

    def __post_init__(self):
        self.slot_means = np.asarray(self.slot_means, dtype=float)
        if np.any(~(self.slot_means > 0)):
            raise DataError("profile slot means must be positive")

    @property
    def slot_count(self) -> int:
        return len(self.slot_means)

    def relative(self) -> np.ndarray:
        """Profile divided by its mean, for shape comparisons."""
        return self.slot_means / self.slot_means.mean()


def intraday_profile(
    days: Sequence[TradingDay],
    start: int = 0,
    stop: int | None = None,
    normalized: bool = True,
) -> IntradayProfile:
    """Mean absolute return per intraday slot over ``days[start:stop]``.

    Days must share one period count (run ``uniformize_periods`` and
    ``trim_session`` first). With ``normalized`` each day is divided by its
    own mean absolute return before averaging; otherwise raw returns are used.
    """
    sel = list(days[start:stop])
    if not sel:
        raise DataError("empty day range for profile")
    counts = {d.n_periods for d in sel}
    if len(counts) != 1:
        raise DataError(
            f"days have period counts {sorted(counts)}; uniformize_periods to a common count first"
        )
    rows = [normalize_mean_abs(d) if normalized else d.returns for d in sel]
    slot_means = np.abs(np.vstack(rows)).mean(axis=0)
    stop = start + len(sel)
    return IntradayProfile(slot_means, (start, stop - 1), len(sel), sel[0].positions.copy())


def induced_p_kurtosis(profile: IntradayProfile | np.ndarray) -> float:
    """p-kurtosis of Gaussian returns whose scale follows the profile.

    With per-slot scale proportional to ``s_j``, ``E|r_j|`` and ``E r_j**2``
    scale as ``s_j`` and ``s_j**2`` so the mean-abs normalized p-kurtosis is
    ``pi/2 * (mean(s**2) / mean(s)**2 - 1)``.
    """
    s = np.asarray(getattr(profile, "slot_means", profile), dtype=float)
    m1, m2 = s.mean(), np.mean(s * s)
    return float(math.pi / 2 * (m2 / (m1 * m1) - 1))


def bunch_profiles(
    days: Sequence[TradingDay], bunch_size: int = 500, normalized: bool = True
) -> tuple[list[IntradayProfile], IntradayProfile | None]:
    """Profiles over contiguous bunches; the trailing partial bunch is returned separately."""
    if bunch_size < 1:
        raise DataError("bunch_size must be positive")
    full = [
        intraday_profile(days, s, s + bunch_size, normalized)
        for s in range(0, len(days) - bunch_size + 1, bunch_size)
    ]
    rest = len(days) - len(full) * bunch_size
    partial = intraday_profile(days, len(days) - rest, None, normalized) if rest else None
    return full, partial


def write_profile_csv(profile: IntradayProfile, path, header_comment: str | None = None) -> None:
    with open(Path(path), "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("slot_index", "slot_mean"))
        for j, v in enumerate(profile.slot_means):
            w.writerow((j, repr(float(v))))


def read_profile_csv(path) -> np.ndarray:
    with open(Path(path)) as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    return np.array([float(r[1]) for r in rows[1:]])
