import csv
import dataclasses
import json

import numpy as np
import pytest

from pscom_alloc import (
    ChannelSpec,
    default_scenario_config,
    serialize_scenario_config,
)
from pscom_alloc.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_IO,
    EXIT_OK,
    EXIT_ORACLE,
    main,
)


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(serialize_scenario_config(default_scenario_config()))
    return path


def _write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(serialize_scenario_config(config))
    return path


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class TestSolveCommand:
    def test_happy_path(self, config_path, tmp_path, capsys):
        out = tmp_path / "results"
        code = main(["solve", "--config", str(config_path), "--out", str(out)])
        assert code == EXIT_OK
        assert (out / "summary.csv").is_file() and (out / "detail.csv").is_file()
        stdout = capsys.readouterr().out
        for name in ("method1", "method2", "equal_power", "non_semantic"):
            assert name in stdout
        assert "tau=" in stdout and "total_power=" in stdout

    def test_method_filter(self, config_path, tmp_path, capsys):
        out = tmp_path / "r"
        code = main(
            ["solve", "--config", str(config_path), "--out", str(out),
             "--method", "non_semantic"]
        )
        assert code == EXIT_OK
        rows = _rows(out / "summary.csv")
        assert [r["method"] for r in rows] == ["non_semantic"]

    def test_invalid_curve_names_first_knot_rule(self, tmp_path, capsys):
        doc = json.loads(serialize_scenario_config(default_scenario_config()))
        doc["curve"]["knots"][0] = [1.0, 5.0]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        code = main(["solve", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "curve.knots" in err and "first knot" in err

    def test_missing_config_path(self, tmp_path, capsys):
        code = main(["solve", "--config", str(tmp_path / "nope.json")])
        assert code == EXIT_CONFIG
        assert "does not exist" in capsys.readouterr().err

    def test_unknown_method_name(self, config_path, capsys):
        code = main(["solve", "--config", str(config_path), "--method", "bogus"])
        assert code == EXIT_CONFIG
        assert "bogus" in capsys.readouterr().err

    def test_enumeration_guard_refuses(self, tmp_path, capsys):
        # 10 knots and 9 users: 10^9 candidate vectors
        knots = [[1.0, 0.0]] + [
            [round(1.0 - 0.08 * i, 2), float(100 * i * i)] for i in range(1, 10)
        ]
        doc = json.loads(serialize_scenario_config(default_scenario_config()))
        doc["curve"]["knots"] = knots
        doc["channel"] = {"n_users": 9, "gain_min": 1e-10, "gain_max": 1e-8, "seed": 1}
        path = tmp_path / "big.json"
        path.write_text(json.dumps(doc))
        code = main(["solve", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        assert "--force" in capsys.readouterr().err

    def test_infeasible_exit(self, tmp_path, capsys):
        cfg = default_scenario_config()
        cfg = dataclasses.replace(
            cfg,
            system=dataclasses.replace(cfg.system, tau_lo_init=9e9, tau_hi_init=1e10),
        )
        path = _write_config(tmp_path, cfg)
        code = main(["solve", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == EXIT_INFEASIBLE

    def test_io_failure(self, config_path, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("file, not a directory")
        code = main(
            ["solve", "--config", str(config_path), "--out", str(blocker / "sub")]
        )
        assert code == EXIT_IO
        assert "i/o error" in capsys.readouterr().err


class TestSweepCommand:
    def test_happy_path(self, config_path, tmp_path, capsys):
        out = tmp_path / "sweep"
        code = main(
            ["sweep", "--config", str(config_path), "--out", str(out),
             "--param", "pmax", "--values", "3,4,5,6"]
        )
        assert code == EXIT_OK
        rows = _rows(out / "summary.csv")
        assert len(rows) == 4 * 4  # 4 values x 4 methods
        assert (out / "sweep_pmax.svg").is_file()

    def test_non_monotone_values_rejected(self, config_path, tmp_path, capsys):
        code = main(
            ["sweep", "--config", str(config_path), "--out", str(tmp_path / "o"),
             "--param", "pmax", "--values", "3,5,4"]
        )
        assert code == EXIT_CONFIG
        assert "monotone" in capsys.readouterr().err

    def test_bad_values_list(self, config_path, tmp_path, capsys):
        code = main(
            ["sweep", "--config", str(config_path), "--param", "pmax",
             "--values", "3,x"]
        )
        assert code == EXIT_CONFIG

    def test_users_sweep_prefix_stable_in_detail_csv(self, tmp_path, capsys):
        cfg = dataclasses.replace(
            default_scenario_config(),
            methods=(default_scenario_config().methods[3],),  # non_semantic only
        )
        path = _write_config(tmp_path, cfg)
        out = tmp_path / "users"
        code = main(
            ["sweep", "--config", str(path), "--out", str(out),
             "--param", "users", "--values", "2,3,4"]
        )
        assert code == EXIT_OK
        rows = _rows(out / "detail.csv")
        gains = {}
        for row in rows:
            gains.setdefault(row["scenario_id"], []).append(float(row["gain"]))
        assert gains["users=3"][:2] == gains["users=2"]
        assert gains["users=4"][:3] == gains["users=3"]

    def test_jobs_flag(self, config_path, tmp_path):
        out1 = tmp_path / "serial"
        out2 = tmp_path / "parallel"
        a = main(
            ["sweep", "--config", str(config_path), "--out", str(out1),
             "--param", "pmax", "--values", "3,6", "--method", "method2",
             "--jobs", "1"]
        )
        b = main(
            ["sweep", "--config", str(config_path), "--out", str(out2),
             "--param", "pmax", "--values", "3,6", "--method", "method2",
             "--jobs", "2"]
        )
        assert a == b == EXIT_OK
        assert (out1 / "detail.csv").read_bytes() == (out2 / "detail.csv").read_bytes()


class TestOracleCheckCommand:
    def test_passes_on_small_instance(self, tmp_path, capsys):
        cfg = default_scenario_config()
        cfg = dataclasses.replace(
            cfg, channel=ChannelSpec(n_users=2, gain_min=1e-10, gain_max=1e-8, seed=42)
        )
        path = _write_config(tmp_path, cfg)
        code = main(["oracle-check", "--config", str(path), "--grid-points", "10"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "oracle-check: OK" in out
        assert "method1" in out and "method2" in out and "oracle" in out

    def test_user_cap(self, tmp_path, capsys):
        cfg = dataclasses.replace(
            default_scenario_config(),
            channel=ChannelSpec(n_users=5, gain_min=1e-10, gain_max=1e-8, seed=1),
        )
        path = _write_config(tmp_path, cfg)
        code = main(["oracle-check", "--config", str(path)])
        assert code == EXIT_CONFIG
        assert "limited to 3 users" in capsys.readouterr().err

    def test_default_grid_on_stock_scenario(self, config_path, capsys):
        # the documented default: 3 users, 25 grid points per segment
        # (about 1.2e6 candidate vectors; the slowest test in the suite)
        code = main(["oracle-check", "--config", str(config_path)])
        assert code == EXIT_OK
        assert "oracle-check: OK" in capsys.readouterr().out


class TestArgumentHandling:
    def test_no_subcommand(self, capsys):
        assert main([]) == EXIT_CONFIG

    def test_bad_jobs(self, config_path, capsys):
        code = main(["solve", "--config", str(config_path), "--jobs", "0"])
        assert code == EXIT_CONFIG

    def test_exit_codes_are_distinct_contract(self):
        assert (EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO, EXIT_ORACLE) == (
            0, 1, 2, 3, 4,
        )
