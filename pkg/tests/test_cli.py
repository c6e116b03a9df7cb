import json
import math
import subprocess
import sys

import numpy as np
import pytest

from intraday_kurtosis.analysis import read_csv
from intraday_kurtosis.cli import main
from intraday_kurtosis.simulator import REFERENCE_MODEL, analytic_half_moment, analytic_p_kurtosis

from conftest import quotes_csv


def _day_prices(rng, n=78, p0=100.0):
    return list(p0 * np.exp(np.cumsum(np.r_[0.0, rng.standard_normal(n) * 1e-3])))


@pytest.fixture
def quote_file(tmp_path, rng):
    days = {f"2001-03-{d:02d}": _day_prices(rng) for d in (5, 6, 7)}
    days["2001-03-08"] = [100.0] * 79
    days["2001-03-09"] = _day_prices(rng)
    path = tmp_path / "quotes.csv"
    path.write_bytes(quotes_csv(days))
    return path


def _schedule(tmp_path, regimes, **opts):
    path = tmp_path / "schedule.json"
    path.write_text(json.dumps({"regimes": regimes, **opts}))
    return path


def _regime(days, ratio=4.0968, vol=1e-3):
    return {"days": days, "a": 0.8, "sigma1": 1.0, "sigma2": ratio, "vol_scale": vol}


def _scenario(tmp_path, regimes, name="scen.csv", seed=1987, **opts):
    out = tmp_path / name
    assert main(["scenario", str(_schedule(tmp_path, regimes, **opts)), "-o", str(out), "--seed", str(seed)]) == 0
    return out


def _table(path):
    header, rows = read_csv(path)
    return header, rows


class TestAnalyze:
    def test_outputs_and_dropped(self, quote_file, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["analyze", str(quote_file), "--out", str(out)]) == 0
        assert "dropped 2001-03-08" in capsys.readouterr().out
        header, rows = _table(out / "daily_stats.csv")
        assert header[:2] == ["day", "date"] and "K" in header and "K0_b" in header
        assert [r[1] for r in rows] == ["2001-03-05", "2001-03-06", "2001-03-07", "2001-03-09"]
        _, dropped = _table(out / "dropped.csv")
        assert [r[0] for r in dropped] == ["2001-03-08"]
        assert (out / "daily_stats.csv").read_text().startswith("# intraday-kurtosis daily_stats v1\n")
        summary = json.loads((out / "summary.json").read_text())
        assert summary["n_days"] == 4 and summary["n_dropped"] == 1
        _, ema_rows = _table(out / "ema.csv")
        assert len(ema_rows) == 4

    def test_scenario_row_count(self, tmp_path):
        scen = _scenario(tmp_path, [_regime(40), _regime(25, ratio=2.0)])
        out = tmp_path / "out"
        assert main(["analyze", str(scen), "--out", str(out)]) == 0
        _, rows = _table(out / "daily_stats.csv")
        assert len(rows) == 65
        assert all(int(r[-1]) == 0 for r in rows)  # no gaps
        _, rows = _table(out / "ema.csv")
        assert len(rows) == 65

    def test_json_format(self, quote_file, tmp_path):
        out = tmp_path / "out"
        assert main(["analyze", str(quote_file), "--out", str(out), "--format", "json"]) == 0
        doc = json.loads((out / "daily_stats.json").read_text())
        assert doc["schema"] == "intraday-kurtosis daily_stats v1"
        assert len(doc["rows"]) == 4 and set(doc["rows"][0]) >= {"date", "K", "K_b", "V"}

    def test_deterministic(self, quote_file, tmp_path):
        for d in ("a", "b"):
            assert main(["analyze", str(quote_file), "--out", str(tmp_path / d)]) == 0
        for name in ("daily_stats.csv", "ema.csv", "dropped.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_config_file_and_override(self, quote_file, tmp_path):
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"min-periods": 60}))
        out = tmp_path / "out"
        # 54 periods after trimming < 60: every day is dropped as short
        assert main(["analyze", str(quote_file), "--config", str(conf), "--out", str(out)]) == 0
        assert json.loads((out / "summary.json").read_text())["n_days"] == 0
        assert main(["analyze", str(quote_file), "--config", str(conf), "--min-periods", "40", "--out", str(out)]) == 0
        assert json.loads((out / "summary.json").read_text())["n_days"] == 4

    def test_data_dir_env(self, quote_file, tmp_path, monkeypatch):
        monkeypatch.setenv("INTRADAY_KURTOSIS_DATA_DIR", str(quote_file.parent))
        monkeypatch.chdir(tmp_path / "..")
        assert main(["analyze", quote_file.name, "--out", str(tmp_path / "o")]) == 0


class TestExitCodes:
    def test_missing_input(self, tmp_path, capsys):
        assert main(["analyze", str(tmp_path / "nope.csv")]) == 4
        assert "not found" in capsys.readouterr().err

    def test_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("date,time,price\n2001-01-02,09:30,abc\n")
        assert main(["analyze", str(bad), "--out", str(tmp_path)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("date,time,price\n2001-01-02,09:30,100\n2001-01-02,09:35,-1\n")
        assert main(["analyze", str(bad), "--out", str(tmp_path)]) == 3

    @pytest.mark.parametrize(
        "argv",
        [
            ["analyze"],
            ["bogus"],
            ["analyze", "x.csv", "--ema-window", "0"],
            ["acf", "--stats", "K,nope", "x.csv"],
            ["simulate", "--a", "1.5"],
        ],
    )
    def test_config_errors(self, argv, tmp_path, quote_file):
        argv = [str(quote_file) if a == "x.csv" else a for a in argv]
        assert main(argv + ["--out", str(tmp_path)] if argv[0] != "bogus" else argv) == 4

    def test_bad_config_file(self, tmp_path, quote_file):
        conf = tmp_path / "c.json"
        conf.write_text("[1, 2")
        assert main(["analyze", str(quote_file), "--config", str(conf)]) == 4

    def test_unreachable_calibration(self, tmp_path):
        assert main(["calibrate", "--target-K", "-0.2", "--target-K0", "-0.01", "--out", str(tmp_path)]) == 3


class TestProfile:
    def test_flat_and_bunches(self, tmp_path, capsys):
        scen = _scenario(tmp_path, [_regime(1000, ratio=1.0)], periods_per_day=72)
        out = tmp_path / "out"
        assert main(["profile", str(scen), "--out", str(out)]) == 0
        summary = json.loads((out / "profile_summary.json").read_text())
        assert summary["slot_count"] == 47 and summary["n_days"] == 1000
        assert summary["induced_p_kurtosis"] < 0.005
        assert [(b["first_day"], b["last_day"]) for b in summary["bunches"]] == [(0, 499), (500, 999)]
        header, rows = _table(out / "profile.csv")
        assert header == ["slot_index", "period", "slot_mean", "bunch_0", "bunch_1"]
        b0, b1 = (np.array([float(r[k]) for r in rows]) for k in (3, 4))
        assert np.max(np.abs(b0 - b1)) < 5 * math.sqrt(2) * 0.755 / math.sqrt(500)
        assert "induced p-kurtosis" in capsys.readouterr().out

    def test_too_few_periods(self, tmp_path):
        scen = _scenario(tmp_path, [_regime(3)], periods_per_day=60)
        assert main(["profile", str(scen), "--out", str(tmp_path / "o")]) == 4


class TestAcfCorr:
    def test_iid_days(self, tmp_path):
        scen = _scenario(tmp_path, [_regime(2000)])
        out = tmp_path / "out"
        assert main(["acf", str(scen), "--stats", "K,V", "--acf-max-lag", "20", "--out", str(out), "--centered"]) == 0
        header, rows = _table(out / "acf.csv")
        assert header == ["lag", "C_K", "C_V"]
        assert float(rows[0][1]) == 1.0 and float(rows[0][2]) == 1.0
        assert abs(float(rows[1][1])) < 3 / math.sqrt(2000)

        # non-centered: lag-1 value sits at mu^2 / E[K^2] within the noise band
        assert main(["analyze", str(scen), "--out", str(out)]) == 0
        _, srows = _table(out / "daily_stats.csv")
        k = np.array([float(r[3]) for r in srows])
        assert main(["acf", str(scen), "--acf-max-lag", "5", "--out", str(out)]) == 0
        _, rows = _table(out / "acf.csv")
        assert float(rows[0][1]) == 1.0
        assert abs(float(rows[1][1]) - k.mean() ** 2 / np.mean(k * k)) < 3 / math.sqrt(2000)

    def test_persistent_k(self, tmp_path):
        regimes = [_regime(100, ratio=r) for r in (1.0, 6.0) * 10]
        scen = _scenario(tmp_path, regimes)
        out = tmp_path / "out"
        assert main(["acf", str(scen), "--stats", "K", "--acf-max-lag", "50", "--out", str(out), "--centered"]) == 0
        _, rows = _table(out / "acf.csv")
        c = np.array([float(r[1]) for r in rows])
        band = 3 / math.sqrt(2000)
        assert np.all(c[1:11] > band)
        assert c[1] > c[10] > c[50]

    def test_series_input(self, tmp_path):
        rng = np.random.default_rng(4)
        for name in ("x", "y"):
            lines = ["# test", "day_index,value"] + [f"{i},{float(v)!r}" for i, v in enumerate(rng.standard_normal(1200))]
            (tmp_path / f"{name}.csv").write_text("\n".join(lines) + "\n")
        out = tmp_path / "out"
        assert main(["corr", "--series", str(tmp_path / "x.csv"), str(tmp_path / "x.csv"), "--no-ema", "--out", str(out)]) == 0
        _, rows = _table(out / "corr.csv")
        assert [float(r[3]) for r in rows] == pytest.approx([1.0, 1.0])
        assert [(r[1], r[2]) for r in rows] == [("0", "599"), ("600", "1199")]
        assert main(["acf", "--series", str(tmp_path / "y.csv"), "--acf-max-lag", "3", "--out", str(out)]) == 0
        assert _table(out / "acf.csv")[0] == ["lag", "C_y"]

    def test_corr_needs_two(self, quote_file, tmp_path):
        assert main(["corr", str(quote_file), "--stats", "K", "--out", str(tmp_path)]) == 4


class TestSimulateCalibrate:
    def test_simulate_seed_echo_and_repeat(self, tmp_path, capsys):
        for d in ("a", "b"):
            argv = ["simulate", "--days", "200", "--seed", "5", "--out", str(tmp_path / d)]
            assert main(argv + (["--workers", "2"] if d == "b" else [])) == 0
        assert "seed 5" in capsys.readouterr().out
        doc = json.loads((tmp_path / "a" / "simulation.json").read_text())
        assert doc["seed"] == 5
        assert doc["model"] == {"a": 0.8, "sigma1": 0.62, "sigma2": 2.54}
        for name in ("simulation.json", "simulated_daily.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        _, rows = _table(tmp_path / "a" / "simulated_daily.csv")
        assert len(rows) == 200

    def test_calibrate_roundtrip(self, tmp_path):
        argv = [
            "calibrate",
            "--target-K", repr(float(analytic_p_kurtosis(REFERENCE_MODEL))),
            "--target-K0", repr(float(analytic_half_moment(REFERENCE_MODEL))),
            "--out", str(tmp_path),
        ]
        assert main(argv) == 0
        doc = json.loads((tmp_path / "calibration.json").read_text())
        assert doc["model"]["a"] == pytest.approx(0.80, abs=1e-8)
        assert doc["ratio"] == pytest.approx(2.54 / 0.62, rel=1e-8)
        assert doc["achieved"]["excess_kurtosis"] == pytest.approx(6.92, abs=0.01)

    def test_calibrate_verify(self, tmp_path):
        assert main(["calibrate", "--verify-days", "100", "--seed", "3", "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "calibration.json").read_text())
        assert doc["finite_sample"]["seed"] == 3
        assert set(doc["finite_sample"]["mean"]) >= {"K", "K_b", "K0", "K0_b"}


class TestScenarioCommand:
    def test_gzip_and_repeat(self, tmp_path):
        a = _scenario(tmp_path, [_regime(5)], name="a.csv.gz")
        b = _scenario(tmp_path, [_regime(5)], name="b.csv.gz")
        assert a.read_bytes()[:2] == b"\x1f\x8b"
        assert a.read_bytes() == b.read_bytes()
        c = _scenario(tmp_path, [_regime(5)], name="c.csv.gz", seed=2)
        assert c.read_bytes() != a.read_bytes()

    def test_bad_schedule(self, tmp_path):
        bad = tmp_path / "s.json"
        bad.write_text("{")
        assert main(["scenario", str(bad), "-o", str(tmp_path / "x.csv")]) == 4
        bad.write_text(json.dumps({"regimes": [_regime(2)], "colour": "red"}))
        assert main(["scenario", str(bad), "-o", str(tmp_path / "x.csv")]) == 4


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "intraday_kurtosis", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.1.0"
