"""Two-Gaussian mixture null model and synthetic data.

Every simulated day draws from its own random substream, keyed by
``(seed, day_index)``, so results do not depend on how days are
scheduled across workers.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize
from scipy.special import gamma

from .estimators import HALF_MOMENT_REF, DailyStats, daily_stats
from .exceptions import CalibrationError, ConfigError, NoSolutionError
from .market_data import QuoteDay, QuoteSeries
from .timeseries import ema, ema_noise_factor

# E|z|^(1/2) for z ~ N(0, 1)
_GAUSS_HALF_ABS = 2**0.25 * gamma(0.75) / math.sqrt(math.pi)
_GAUSS_MEAN_ABS = math.sqrt(2 / math.pi)

SUMMARY_FIELDS = ("K", "K_b", "K0", "K0_b")


@dataclass(frozen=True)
class MixtureModel:
    """With probability ``a`` draw from N(0, sigma1), otherwise N(0, sigma2).

    Stored with ``sigma1 <= sigma2``; swapped inputs are canonicalized.
    """

    a: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        if not 0 <= self.a <= 1:
            raise ConfigError(f"mixture weight a={self.a} outside [0, 1]")
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ConfigError("mixture dispersions must be positive")
        if self.sigma1 > self.sigma2:
            a, s1, s2 = 1 - self.a, self.sigma2, self.sigma1
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "sigma1", s1)
            object.__setattr__(self, "sigma2", s2)

    @property
    def ratio(self) -> float:
        return self.sigma2 / self.sigma1

    def scaled(self, factor: float) -> "MixtureModel":
        return MixtureModel(self.a, self.sigma1 * factor, self.sigma2 * factor)

    def unit_mean_abs(self) -> "MixtureModel":
        """The same shape rescaled so that ``E|x| = 1``."""
        return self.scaled(1 / analytic_moments(self).mean_abs)

    def as_dict(self) -> dict:
        return asdict(self)


REFERENCE_MODEL = MixtureModel(0.80, 0.62, 2.54)


def day_stream(seed: int, day: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(day,)))


def sample_mixture(m: MixtureModel, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ConfigError("sample size must be >= 1")
    first = rng.random(n) < m.a
    z = rng.standard_normal(n)
    return z * np.where(first, m.sigma1, m.sigma2)


class MixtureMoments(NamedTuple):
    mean_abs: float
    second: float
    fourth: float
    half_abs: float


def analytic_moments(m: MixtureModel) -> MixtureMoments:
    a, s1, s2 = m.a, m.sigma1, m.sigma2
    return MixtureMoments(
        mean_abs=_GAUSS_MEAN_ABS * (a * s1 + (1 - a) * s2),
        second=a * s1**2 + (1 - a) * s2**2,
        fourth=3 * (a * s1**4 + (1 - a) * s2**4),
        half_abs=_GAUSS_HALF_ABS * (a * math.sqrt(s1) + (1 - a) * math.sqrt(s2)),
    )


def analytic_p_kurtosis(m: MixtureModel) -> float:
    mo = analytic_moments(m)
    return mo.second / mo.mean_abs**2 - math.pi / 2


def analytic_half_moment(m: MixtureModel) -> float:
    """Infinite-sample K0: ``E|x|^(1/2) / sqrt(E|x|)`` minus the Gaussian value."""
    mo = analytic_moments(m)
    return mo.half_abs / math.sqrt(mo.mean_abs) - HALF_MOMENT_REF


def analytic_excess_kurtosis(m: MixtureModel) -> float:
    mo = analytic_moments(m)
    return mo.fourth / mo.second**2 - 3


# --------------------------------------------------------------------------
# finite-sample experiment


@dataclass(frozen=True)
class SimConfig:
    n_days: int = 5000
    periods_per_day: int = 50
    seed: int = 1987
    ema_window: int = 60

    def __post_init__(self):
        if self.n_days < 1:
            raise ConfigError("n_days must be >= 1")
        if self.periods_per_day < 2:
            raise ConfigError("periods_per_day must be >= 2")
        if self.ema_window < 1:
            raise ConfigError("ema_window must be >= 1")


@dataclass
class NullExperimentReport:
    """Summary of a simulated stretch of days.

    ``std`` is the sample standard deviation of the daily values.
    ``ema_std`` is the same for their ``ema_window``-day moving average,
    warm-up days excluded. ``ema_se`` is the spread that moving average has
    for independent days, ``std * ema_noise_factor(ema_window)``: the error
    bar of one point of a smoothed curve.
    """

    model: MixtureModel
    config: SimConfig
    mean: dict[str, float]
    std: dict[str, float]
    ema_std: dict[str, float]
    ema_se: dict[str, float]
    daily: list[DailyStats] = field(repr=False, default_factory=list)

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(d, name) for d in self.daily], dtype=float)

    def to_dict(self) -> dict:
        return {
            "seed": self.config.seed,
            "model": self.model.as_dict(),
            "config": asdict(self.config),
            "analytic": {
                "K": analytic_p_kurtosis(self.model),
                "K0": analytic_half_moment(self.model),
                "excess_kurtosis": analytic_excess_kurtosis(self.model),
            },
            "mean": self.mean,
            "std": self.std,
            "ema_std": self.ema_std,
            "ema_se": self.ema_se,
        }


def simulate_days(m: MixtureModel, periods: int, seed: int, days: Sequence[int]) -> list[DailyStats]:
    return [daily_stats(sample_mixture(m, periods, day_stream(seed, d))) for d in days]


def _simulate_chunk(args):
    return simulate_days(*args)


def run_null_experiment(m: MixtureModel, cfg: SimConfig = SimConfig(), workers: int = 1) -> NullExperimentReport:
    """Simulate ``cfg.n_days`` days and run every day through ``daily_stats``.

    All statistics of a day come from the same draws. ``workers > 1``
    spreads days over processes; the output is identical either way.
    """
    days = range(cfg.n_days)
    if workers > 1:
        chunks = [days[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_simulate_chunk, [(m, cfg.periods_per_day, cfg.seed, c) for c in chunks]))
        daily = [None] * cfg.n_days
        for chunk, part in zip(chunks, parts):
            for d, s in zip(chunk, part):
                daily[d] = s
    else:
        daily = simulate_days(m, cfg.periods_per_day, cfg.seed, days)

    mean, std, ema_std, ema_se = {}, {}, {}, {}
    factor = ema_noise_factor(cfg.ema_window)
    for name in SUMMARY_FIELDS + ("V", "moors"):
        x = np.array([getattr(d, name) for d in daily])
        mean[name] = float(x.mean())
        std[name] = float(x.std(ddof=1)) if x.size > 1 else 0.0
        ema_se[name] = std[name] * factor
        smooth = ema(x, cfg.ema_window)[cfg.ema_window :]
        ema_std[name] = float(smooth.std(ddof=1)) if smooth.size > 1 else float("nan")
    tails = np.array([d.n_tail for d in daily], dtype=float)
    mean["tail_rate"] = float(tails.sum() / (cfg.n_days * cfg.periods_per_day))
    return NullExperimentReport(m, cfg, mean, std, ema_std, ema_se, daily)


# --------------------------------------------------------------------------
# calibration


def _shape_stats(a: float, rho: float) -> tuple[float, float]:
    m = MixtureModel(a, 1.0, rho)
    return analytic_p_kurtosis(m), analytic_half_moment(m)


def _unpack(p):
    a = 1 / (1 + math.exp(-p[0]))
    rho = 1 + math.exp(p[1])
    return a, rho


def calibrate_mixture(target_K: float, target_K0: float, tol: float = 1e-10, max_iter: int = 400) -> MixtureModel:
    """Find the mixture whose infinite-sample K and K0 equal the targets.

    Solves for the weight ``a`` and the dispersion ratio ``sigma2/sigma1``;
    the overall scale is fixed by ``E|x| = 1``. The Gaussian targets
    ``(0, 0)`` return ``a = 0.5`` with equal dispersions.
    """
    if abs(target_K) <= tol and abs(target_K0) <= tol:
        s = math.sqrt(math.pi / 2)
        return MixtureModel(0.5, s, s)
    if target_K <= 0 or target_K0 >= 0:
        raise NoSolutionError(
            f"targets K={target_K}, K0={target_K0} unreachable: a mixture has K > 0 and K0 < 0",
            residual=float("inf"),
        )

    def resid(p):
        a, rho = _unpack(p)
        k, k0 = _shape_stats(a, rho)
        return [k - target_K, (k0 - target_K0) * 10]

    trace = []
    best = None
    for a0 in (0.8, 0.5, 0.95, 0.2, 0.99):
        for rho0 in (4.0, 2.0, 10.0, 30.0):
            p0 = [math.log(a0 / (1 - a0)), math.log(rho0 - 1)]
            sol = optimize.root(resid, p0, method="hybr", options={"maxfev": max_iter, "xtol": 1e-14})
            a, rho = _unpack(sol.x)
            k, k0 = _shape_stats(a, rho)
            err = max(abs(k - target_K), abs(k0 - target_K0))
            trace.append({"start": (a0, rho0), "a": a, "ratio": rho, "residual": err})
            if best is None or err < best[0]:
                best = (err, a, rho)
            if err <= tol:
                return MixtureModel(a, 1.0, rho).unit_mean_abs()
    err, a, rho = best
    # a residual far from zero after every start means the pair lies outside
    # the reachable set; a tiny one means the solver stalled near a root
    if err > 1e-6 or a < 1e-6 or a > 1 - 1e-6 or rho > 1e6:
        raise NoSolutionError(
            f"no mixture reproduces K={target_K}, K0={target_K0} (best residual {err:.3g})",
            residual=err,
            trace=trace,
        )
    raise CalibrationError(f"root finding did not converge (best residual {err:.3g})", residual=err, trace=trace)


# --------------------------------------------------------------------------
# synthetic regime scenarios


@dataclass(frozen=True)
class Regime:
    days: int
    model: MixtureModel
    vol_scale: float

    def __post_init__(self):
        if self.days < 1:
            raise ConfigError("regime must span at least one day")
        if not self.vol_scale > 0:
            raise ConfigError("vol_scale must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 1987
    periods_per_day: int = 78
    start_date: dt.date = dt.date(1990, 1, 2)
    start_price: float = 1000.0
    session_open: dt.time = dt.time(9, 30)
    bar_minutes: int = 5
    intraday_profile: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.periods_per_day < 1:
            raise ConfigError("periods_per_day must be >= 1")
        if self.intraday_profile is not None:
            if len(self.intraday_profile) != self.periods_per_day:
                raise ConfigError("intraday_profile length must equal periods_per_day")
            if min(self.intraday_profile) <= 0:
                raise ConfigError("intraday_profile entries must be positive")


def _business_days(start: dt.date):
    d = start
    while True:
        if d.weekday() < 5:
            yield d
        d += dt.timedelta(days=1)


def regime_scenario(schedule: Sequence[Regime], cfg: ScenarioConfig = ScenarioConfig()) -> QuoteSeries:
    """Synthesize quotes whose daily returns follow the scheduled regimes.

    Returns of a day are ``vol_scale * profile_j * x_j`` with ``x_j`` drawn
    from the regime's mixture. Use ``MixtureModel.unit_mean_abs`` models to
    keep the p-volatility set by ``vol_scale`` alone.
    """
    if not schedule:
        raise ConfigError("empty schedule")
    profile = np.ones(cfg.periods_per_day) if cfg.intraday_profile is None else np.asarray(cfg.intraday_profile)
    base = dt.datetime.combine(cfg.start_date, cfg.session_open)
    step = dt.timedelta(minutes=cfg.bar_minutes)
    times = [(base + k * step).time() for k in range(cfg.periods_per_day + 1)]
    dates = _business_days(cfg.start_date)
    price = cfg.start_price
    out, d = [], 0
    for regime in schedule:
        for _ in range(regime.days):
            r = sample_mixture(regime.model, cfg.periods_per_day, day_stream(cfg.seed, d)) * profile * regime.vol_scale
            prices = price * np.exp(np.concatenate(([0.0], np.cumsum(r))))
            out.append(QuoteDay(next(dates), times, prices))
            price = prices[-1]
            d += 1
    return QuoteSeries(out)


def load_schedule(doc) -> tuple[list[Regime], dict]:
    """Parse a schedule document.

    Either a list of ``{days, a, sigma1, sigma2, vol_scale}`` or an object
    ``{"regimes": [...], ...}`` whose other keys override ``ScenarioConfig``
    fields (``periods_per_day``, ``intraday_profile``, ``start_price``...).
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    options = {}
    if isinstance(doc, dict):
        options = {k: v for k, v in doc.items() if k != "regimes"}
        doc = doc.get("regimes", [])
    regimes = []
    for i, rec in enumerate(doc):
        try:
            regimes.append(
                Regime(
                    int(rec["days"]),
                    MixtureModel(float(rec["a"]), float(rec["sigma1"]), float(rec["sigma2"])),
                    float(rec.get("vol_scale", 1.0)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"schedule entry {i}: {exc}") from None
    if "start_date" in options:
        options["start_date"] = dt.date.fromisoformat(options["start_date"])
    if "session_open" in options:
        options["session_open"] = dt.time.fromisoformat(options["session_open"])
    if options.get("intraday_profile") is not None:
        options["intraday_profile"] = tuple(float(v) for v in options["intraday_profile"])
    return regimes, options
