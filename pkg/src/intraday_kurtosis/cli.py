"""Command-line entry point: ``intraday-kurtosis <command> ...``.

Exit codes: 0 ok, 2 parse error, 3 data error, 4 configuration/path error.
Defaults may come from a JSON file given with ``--config`` (keys are the
long option names with dashes replaced by underscores); explicit flags win.
Relative input paths that do not exist are looked up under
``$INTRADAY_KURTOSIS_DATA_DIR``.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    analyze_quotes,
    schema_comment,
    stats_rows,
    write_csv,
    write_json,
)
from .estimators import STAT_FIELDS
from .exceptions import ConfigError, IntradayKurtosisError
from .market_data import SessionConfig, prepare_days, read_quotes, write_quotes_csv
from .seasonality import bunch_profiles, induced_p_kurtosis, intraday_profile
from .simulator import (
    REFERENCE_MODEL,
    MixtureModel,
    ScenarioConfig,
    SimConfig,
    analytic_excess_kurtosis,
    analytic_half_moment,
    analytic_p_kurtosis,
    calibrate_mixture,
    load_schedule,
    regime_scenario,
    run_null_experiment,
)
from .timeseries import DaySeries, autocorr_noncentered, ema, window_starts, windowed_correlation

log = logging.getLogger("intraday_kurtosis")

DATA_DIR_ENV = "INTRADAY_KURTOSIS_DATA_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _non_negative(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def resolve_input(path) -> Path:
    p = Path(path)
    if not p.exists() and not p.is_absolute() and os.environ.get(DATA_DIR_ENV):
        p = Path(os.environ[DATA_DIR_ENV]) / p
    if not p.is_file():
        raise ConfigError(f"input file not found: {path}")
    return p


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _session(args) -> SessionConfig:
    return SessionConfig(
        bar_interval=dt.timedelta(minutes=args.bar_minutes),
        trim=dt.timedelta(minutes=args.trim_minutes),
        min_periods=args.min_periods,
    )


def _emit_table(args, out: Path, name: str, header, rows) -> Path:
    if args.format == "json":
        path = out / f"{name}.json"
        write_json(path, {"schema": schema_comment(name), "rows": [dict(zip(header, r)) for r in rows]})
    else:
        path = out / f"{name}.csv"
        write_csv(path, header, rows, name)
    return path


def _clean(v):
    if isinstance(v, (float, np.floating)) and not np.isfinite(v):
        return None
    return v


# --------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    series = read_quotes(resolve_input(args.input), args.input_format)
    res = analyze_quotes(series, _session(args))
    out = _out_dir(args)
    header, rows = stats_rows(res.dates, res.stats, res.gaps)
    _emit_table(args, out, "daily_stats", header, rows)
    if res.stats:
        smooth = res.ema_table(args.ema_window)
        names = list(smooth)
        ema_rows = [[i, d, *(smooth[n][i] for n in names)] for i, d in enumerate(res.dates)]
        _emit_table(args, out, "ema", ["day", "date", *(f"ema_{n}" for n in names)], ema_rows)
    _emit_table(args, out, "dropped", ["date", "reason"], [[d.date, d.reason] for d in res.dropped])
    summary = {
        "input": str(args.input),
        "n_days": len(res.stats),
        "n_dropped": len(res.dropped),
        "ema_window": args.ema_window,
        "mean": {n: float(res.series(n).mean()) for n in ("V", "K", "K_b", "K0", "K0_b", "moors")}
        if res.stats
        else {},
    }
    write_json(out / "summary.json", summary)
    print(f"analyzed {len(res.stats)} days, dropped {len(res.dropped)}")
    for d in res.dropped:
        print(f"dropped {d.date}: {d.reason}")
    return 0


def cmd_profile(args) -> int:
    series = read_quotes(resolve_input(args.input), args.input_format)
    prep = prepare_days(series, _session(args), uniformize_to=args.target)
    if not prep.days:
        raise ConfigError("no days left after uniformization and trimming")
    normalized = not args.raw
    prof = intraday_profile(prep.days, normalized=normalized)
    out = _out_dir(args)
    bunches, partial = bunch_profiles(prep.days, args.bunch_size, normalized)
    header = ["slot_index", "period", "slot_mean"]
    header += [f"bunch_{k}" for k in range(len(bunches))]
    if partial is not None:
        header.append("partial")
    rows = []
    for j in range(prof.slot_count):
        row = [j, int(prof.positions[j]), prof.slot_means[j]]
        row += [b.slot_means[j] for b in bunches]
        if partial is not None:
            row.append(partial.slot_means[j])
        rows.append(row)
    _emit_table(args, out, "profile", header, rows)
    summary = {
        "n_days": prof.n_days,
        "slot_count": prof.slot_count,
        "normalized": normalized,
        "induced_p_kurtosis": induced_p_kurtosis(prof),
        "bunches": [
            {"first_day": b.day_range[0], "last_day": b.day_range[1], "induced_p_kurtosis": induced_p_kurtosis(b)}
            for b in bunches
        ],
        "partial": None
        if partial is None
        else {"first_day": partial.day_range[0], "last_day": partial.day_range[1], "n_days": partial.n_days},
        "dropped": [{"date": str(d.date), "reason": d.reason} for d in prep.dropped],
    }
    write_json(out / "profile_summary.json", summary)
    print(f"induced p-kurtosis {summary['induced_p_kurtosis']:.6f} over {prof.n_days} days, {prof.slot_count} slots")
    return 0


def _input_series(args, names):
    if args.series:
        out = {}
        for k, s in enumerate(args.series):
            name = Path(s).stem
            out[name if name not in out else f"{name}_{k}"] = DaySeries.from_csv(resolve_input(s)).values
        return out
    if not args.input:
        raise ConfigError("give a quote file or --series")
    unknown = [n for n in names if n not in STAT_FIELDS + ("moors_excess",)]
    if unknown:
        raise ConfigError(f"unknown statistic(s) {unknown}; choose from {', '.join(STAT_FIELDS)}")
    res = analyze_quotes(read_quotes(resolve_input(args.input), args.input_format), _session(args))
    if not res.stats:
        raise ConfigError("no usable days in input")
    return {n: res.series(n) for n in names}


def cmd_acf(args) -> int:
    data = _input_series(args, args.stats.split(","))
    n = min(len(v) for v in data.values())
    max_lag = min(args.acf_max_lag, n - 1)
    if max_lag < args.acf_max_lag:
        log.warning("max lag reduced to %d (series length %d)", max_lag, n)
    acfs = {k: autocorr_noncentered(v, max_lag, centered=args.centered) for k, v in data.items()}
    rows = [[t, *(acfs[k][t] for k in acfs)] for t in range(max_lag + 1)]
    _emit_table(args, _out_dir(args), "acf", ["lag", *(f"C_{k}" for k in acfs)], rows)
    band = 3 / np.sqrt(n)
    print(f"acf up to lag {max_lag}; iid noise band +/-{band:.4f}")
    return 0


def cmd_corr(args) -> int:
    names = args.stats.split(",")
    if len(names) != 2 and not args.series:
        raise ConfigError("--stats needs exactly two names")
    data = _input_series(args, names)
    if len(data) != 2:
        raise ConfigError("corr needs exactly two series")
    a, b = data.values()
    if not args.no_ema:
        a, b = ema(a, args.ema_window), ema(b, args.ema_window)
    corr = windowed_correlation(a, b, args.corr_window, args.stride)
    starts = window_starts(len(a), args.corr_window, args.stride)
    rows = [[k, s, s + args.corr_window - 1, _clean(c)] for k, (s, c) in enumerate(zip(starts, corr))]
    _emit_table(args, _out_dir(args), "corr", ["window", "first_day", "last_day", "corr"], rows)
    print(f"{len(rows)} windows of {args.corr_window} days")
    return 0


def cmd_simulate(args) -> int:
    model = MixtureModel(args.a, args.sigma1, args.sigma2)
    cfg = SimConfig(n_days=args.days, periods_per_day=args.periods, seed=args.seed, ema_window=args.ema_window)
    rep = run_null_experiment(model, cfg, workers=args.workers)
    out = _out_dir(args)
    write_json(out / "simulation.json", rep.to_dict())
    header, rows = stats_rows(list(range(cfg.n_days)), rep.daily)
    _emit_table(args, out, "simulated_daily", header, rows)
    print(f"seed {cfg.seed}: " + " ".join(f"{k}={rep.mean[k]:.4f}+/-{rep.std[k]:.4f}" for k in ("K", "K_b", "K0", "K0_b")))
    return 0


def cmd_calibrate(args) -> int:
    model = calibrate_mixture(args.target_K, args.target_K0)
    doc = {
        "targets": {"K": args.target_K, "K0": args.target_K0},
        "model": model.as_dict(),
        "ratio": model.ratio,
        "achieved": {
            "K": analytic_p_kurtosis(model),
            "K0": analytic_half_moment(model),
            "excess_kurtosis": analytic_excess_kurtosis(model),
        },
    }
    if args.verify_days:
        rep = run_null_experiment(model, SimConfig(args.verify_days, args.periods, args.seed))
        doc["finite_sample"] = {"seed": args.seed, "periods_per_day": args.periods, "mean": rep.mean, "std": rep.std}
    write_json(_out_dir(args) / "calibration.json", doc)
    print(f"a={model.a:.6f} sigma1={model.sigma1:.6f} sigma2={model.sigma2:.6f} ratio={model.ratio:.6f}")
    return 0


def cmd_scenario(args) -> int:
    try:
        doc = json.loads(resolve_input(args.schedule).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"schedule is not valid JSON: {exc}") from None
    regimes, options = load_schedule(doc)
    options["seed"] = args.seed
    if args.periods is not None:
        options["periods_per_day"] = args.periods
    try:
        cfg = ScenarioConfig(**options)
    except TypeError as exc:
        raise ConfigError(f"bad schedule option: {exc}") from None
    series = regime_scenario(regimes, cfg)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    write_quotes_csv(series, args.output)
    print(f"wrote {len(series)} days, {series.n_quotes} quotes to {args.output}")
    return 0


# --------------------------------------------------------------------------
# parser


def _add_common(p, session=True):
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    if session:
        p.add_argument("--input-format", choices=("csv", "json"), default=None, help="default: from extension")
        p.add_argument("--bar-minutes", type=_positive, default=5)
        p.add_argument("--trim-minutes", type=_non_negative, default=60)
        p.add_argument("--min-periods", type=_non_negative, default=40)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="intraday-kurtosis", description="Intraday non-Gaussianity proxies from high-frequency prices.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="per-day proxies and their moving averages")
    p.add_argument("input")
    p.add_argument("--ema-window", type=_positive, default=60)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("profile", help="intraday volatility profile and induced p-kurtosis")
    p.add_argument("input")
    p.add_argument("--target", type=_positive, default=71, help="periods kept per day before trimming")
    p.add_argument("--bunch-size", type=_positive, default=500)
    p.add_argument("--raw", action="store_true", help="profile raw instead of normalized returns")
    _add_common(p)
    p.set_defaults(func=cmd_profile)

    for name, func, helptext in (
        ("acf", cmd_acf, "non-centered autocorrelation of daily proxies"),
        ("corr", cmd_corr, "windowed correlation of two daily proxies"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input", nargs="?")
        p.add_argument("--series", nargs="+", help="day_index,value CSV file(s) instead of a quote file")
        _add_common(p)
        if name == "acf":
            p.add_argument("--stats", default="K,V")
            p.add_argument("--acf-max-lag", type=_non_negative, default=500)
            p.add_argument("--centered", action="store_true", help="subtract the mean first")
        else:
            p.add_argument("--stats", default="K,V")
            p.add_argument("--corr-window", type=_positive, default=600)
            p.add_argument("--stride", type=_positive, default=None, help="default: window (disjoint)")
            p.add_argument("--ema-window", type=_positive, default=60)
            p.add_argument("--no-ema", action="store_true", help="correlate daily values, not moving averages")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="finite-sample experiment under the mixture null")
    p.add_argument("--a", type=float, default=REFERENCE_MODEL.a)
    p.add_argument("--sigma1", type=float, default=REFERENCE_MODEL.sigma1)
    p.add_argument("--sigma2", type=float, default=REFERENCE_MODEL.sigma2)
    p.add_argument("--days", type=_positive, default=5000)
    p.add_argument("--periods", type=_positive, default=50)
    p.add_argument("--seed", type=int, default=1987)
    p.add_argument("--ema-window", type=_positive, default=60)
    p.add_argument("--workers", type=_positive, default=1)
    _add_common(p, session=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit the mixture to target K and K0")
    p.add_argument("--target-K", dest="target_K", type=float, default=analytic_p_kurtosis(REFERENCE_MODEL))
    p.add_argument("--target-K0", dest="target_K0", type=float, default=analytic_half_moment(REFERENCE_MODEL))
    p.add_argument("--verify-days", type=_non_negative, default=0, help="also simulate this many days")
    p.add_argument("--periods", type=_positive, default=50)
    p.add_argument("--seed", type=int, default=1987)
    _add_common(p, session=False)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("scenario", help="synthesize a quote file from a regime schedule")
    p.add_argument("schedule", help="JSON schedule")
    p.add_argument("-o", "--output", required=True, help="quote CSV to write (.gz compresses)")
    p.add_argument("--seed", type=int, default=1987)
    p.add_argument("--periods", type=_positive, default=None, help="returns per day (default 78)")
    _add_common(p, session=False)
    p.set_defaults(func=cmd_scenario)
    return parser


def _config_defaults(argv) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    path = Path(known.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        conf = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(conf, dict):
        raise ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in conf.items()}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        defaults = _config_defaults(argv)
        if defaults:
            for action in parser._subparsers._group_actions:
                for sp in action.choices.values():
                    known = {a.dest for a in sp._actions}
                    sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return args.func(args)
    except IntradayKurtosisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
