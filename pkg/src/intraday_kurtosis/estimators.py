"""Per-day non-Gaussianity proxies.

All statistics except the p-volatility are invariant under a positive
rescaling of the day's returns. Gaussian reference values are subtracted
so that a normal sample scores zero (Moors is reported raw).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gamma, ndtr, ndtri

from .exceptions import DegenerateDayError

SECOND_MOMENT_REF = math.pi / 2
HALF_MOMENT_REF = gamma(0.75) / math.pi**0.25
# P(z < 4 E[z | z < 0]) + P(z > 4 E[z | z > 0]) for z ~ N(0, 1)
TAIL_PROB_REF = 2 * ndtr(-4 * math.sqrt(2 / math.pi))
_GAUSS_OCTILES = ndtri(np.arange(1, 8) / 8)
MOORS_REF = (
    _GAUSS_OCTILES[6] - _GAUSS_OCTILES[4] + _GAUSS_OCTILES[2] - _GAUSS_OCTILES[0]
) / (_GAUSS_OCTILES[5] - _GAUSS_OCTILES[1])


@dataclass(frozen=True)
class GaussianConstants:
    half_moment_ref: float = HALF_MOMENT_REF
    second_moment_ref: float = SECOND_MOMENT_REF
    tail_prob_ref: float = TAIL_PROB_REF
    moors_ref: float = MOORS_REF


GAUSSIAN = GaussianConstants()


def _returns(x) -> np.ndarray:
    return np.asarray(getattr(x, "returns", x), dtype=float)


@dataclass
class NormalizedDay:
    r_hat: np.ndarray
    r_tilde: np.ndarray

    @property
    def n_periods(self) -> int:
        return len(self.r_hat)


def normalize_mean_abs(day) -> np.ndarray:
    """Divide returns by the day's mean absolute return."""
    r = _returns(day)
    scale = np.abs(r).mean() if r.size else 0.0
    if not scale > 0:
        raise DegenerateDayError("all returns are zero", "mean_abs")
    return r / scale


def normalize_leave_one_out(day) -> np.ndarray:
    """Divide each return by the mean absolute value of the *other* returns."""
    r = _returns(day)
    n = r.size
    if n < 2:
        raise DegenerateDayError("need at least 2 returns", "leave_one_out")
    a = np.abs(r)
    denom = (a.sum() - a) / (n - 1)
    if np.any(~(denom > 0)):
        raise DegenerateDayError("a leave-one-out denominator is zero", "leave_one_out")
    return r / denom


def normalize(day) -> NormalizedDay:
    return NormalizedDay(normalize_mean_abs(day), normalize_leave_one_out(day))


def p_volatility(day) -> float:
    r = _returns(day)
    if r.size == 0:
        raise DegenerateDayError("empty day", "V")
    return float(np.abs(r).mean())


def p_kurtosis(normalized) -> float:
    """Mean square of normalized returns minus pi/2."""
    x = np.asarray(normalized, dtype=float)
    if x.size == 0:
        raise DegenerateDayError("empty input", "K")
    return float(np.mean(x * x) - SECOND_MOMENT_REF)


def p_half_moment(normalized) -> float:
    """Mean of ``|x|**0.5`` minus its Gaussian value; negative when leptokurtic."""
    x = np.asarray(normalized, dtype=float)
    if x.size == 0:
        raise DegenerateDayError("empty input", "K0")
    return float(np.mean(np.sqrt(np.abs(x))) - HALF_MOMENT_REF)


def octiles(sample) -> np.ndarray:
    """O_1..O_7, linear interpolation between order statistics.

    Order statistic ``x_(h)`` with ``h = (n - 1) k / 8`` (0-based), the
    same convention as ``numpy.quantile(method="linear")``.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n < 8:
        raise DegenerateDayError(f"need at least 8 values, got {n}", "octiles")
    h = (n - 1) * np.arange(1, 8) / 8
    lo = np.floor(h).astype(int)
    hi = np.minimum(lo + 1, n - 1)
    frac = h - lo
    return x[lo] + frac * (x[hi] - x[lo])


def moors_kurtosis(sample) -> float:
    o = octiles(sample)
    spread = o[5] - o[1]
    if not spread > 0:
        raise DegenerateDayError("octiles O6 and O2 coincide", "moors")
    return float((o[6] - o[4] + o[2] - o[0]) / spread)


def tail_counts(day) -> tuple[int, int]:
    """Counts of returns beyond four times the mean of each half.

    The day is split at its median (values equal to the median go to
    neither half). ``n_left`` counts returns below ``4 * mean(lower half)``
    and ``n_right`` those above ``4 * mean(upper half)``.
    """
    r = _returns(day)
    if r.size < 4:
        raise DegenerateDayError(f"need at least 4 returns, got {r.size}", "tails")
    med = np.median(r)
    lower, upper = r[r < med], r[r > med]
    if lower.size == 0 or upper.size == 0:
        raise DegenerateDayError("a median group is empty", "tails")
    left_cut, right_cut = 4 * lower.mean(), 4 * upper.mean()
    return int(np.sum(r < left_cut)), int(np.sum(r > right_cut))


@dataclass(frozen=True)
class DailyStats:
    V: float
    K: float
    K_b: float
    K0: float
    K0_b: float
    moors: float
    n_left: int
    n_right: int
    n_periods: int

    @property
    def moors_excess(self) -> float:
        return self.moors - MOORS_REF

    @property
    def n_tail(self) -> int:
        return self.n_left + self.n_right

    def as_dict(self) -> dict:
        d = asdict(self)
        d["moors_excess"] = self.moors_excess
        return d


STAT_FIELDS = ("V", "K", "K_b", "K0", "K0_b", "moors", "n_left", "n_right", "n_periods")


def daily_stats(day) -> DailyStats:
    """All proxies for one (trimmed) day.

    Raises ``DegenerateDayError`` whose ``statistic`` attribute names the
    first proxy that could not be computed.
    """
    r = _returns(day)
    r_hat = normalize_mean_abs(r)
    r_tilde = normalize_leave_one_out(r)
    n_left, n_right = tail_counts(r)
    return DailyStats(
        V=p_volatility(r),
        K=p_kurtosis(r_hat),
        K_b=p_kurtosis(r_tilde),
        K0=p_half_moment(r_hat),
        K0_b=p_half_moment(r_tilde),
        moors=moors_kurtosis(r),
        n_left=n_left,
        n_right=n_right,
        n_periods=r.size,
    )
