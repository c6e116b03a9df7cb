import datetime as dt

import numpy as np
import pytest
from hypothesis import settings

from intraday_kurtosis.market_data import TradingDay

settings.register_profile("repo", deadline=None, derandomize=True)
settings.load_profile("repo")


def quotes_csv(days, start="09:30", step=5):
    """CSV bytes for ``{date: [prices]}`` on a regular bar grid."""
    lines = ["date,time,price"]
    for date, prices in days.items():
        t0 = dt.datetime.combine(dt.date.fromisoformat(date), dt.time.fromisoformat(start))
        for k, p in enumerate(prices):
            lines.append(f"{date},{(t0 + dt.timedelta(minutes=step * k)):%H:%M},{p}")
    return ("\n".join(lines) + "\n").encode()


def make_day(returns, i=0):
    return TradingDay(i, dt.date(2000, 1, 3) + dt.timedelta(days=i), np.asarray(returns, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed again in the terminal summary."""

    def record(name, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
