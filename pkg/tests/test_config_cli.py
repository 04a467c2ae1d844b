import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tail_lab.cli import (
    COMPLETE_MARKER,
    EXIT_FAIL,
    EXIT_NUMERIC,
    EXIT_PASS,
    EXIT_USAGE,
    main,
    parse_complex,
    read_series,
    run_simulation,
    thread_count,
)
from tail_lab.config import SCHEMA_VERSION, ConfigError, DataConfig, RunConfig, TrajectoryConfig


def small_cfg(tmp_path, name="run", **kw):
    base = dict(coupling=1.0, t_max=60.0, h=0.04, trajectories=[TrajectoryConfig("fixed_r", 2.0)],
                output_dir=str(tmp_path / name))
    base.update(kw)
    return RunConfig(**base).validate()


class TestConfig:
    def test_round_trip_default(self):
        cfg = RunConfig()
        assert RunConfig.from_json(cfg.to_json()) == cfg
        assert json.loads(cfg.to_json())["schema_version"] == SCHEMA_VERSION

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from(["wave", "dirac"]), st.floats(-0.2, 0.45), st.lists(st.integers(1, 3), min_size=1, max_size=3),
           st.floats(0.005, 0.05), st.floats(10, 1000), st.lists(st.floats(0.1, 0.9), max_size=3),
           st.none() | st.floats(1.0, 50.0))
    def test_round_trip(self, problem, coupling, modes, h, t_max, rays, t_lo):
        trs = [TrajectoryConfig("ray", g) for g in rays] + [TrajectoryConfig("fixed_r", 2.0)]
        cfg = RunConfig(problem=problem, coupling=coupling, modes=modes, h=h, t_max=t_max,
                        trajectories=trs, t_lo=t_lo, data=DataConfig(amplitude=0.5))
        assert RunConfig.from_json(cfg.to_json()) == cfg

    @pytest.mark.parametrize("over,field", [
        ({"problem": "heat"}, "problem"),
        ({"coupling": -0.3}, "coupling"),
        ({"problem": "dirac", "coupling": 0.6, "modes": [1]}, "coupling"),
        ({"problem": "dirac", "n": 4, "coupling": 0.1, "modes": [1]}, "n"),
        ({"problem": "dirac", "coupling": 0.1, "modes": [0]}, "modes"),
        ({"n": 2}, "n"),
        ({"h": 0.0}, "h"),
        ({"dt": 0.5}, "dt"),
        ({"modes": []}, "modes"),
        ({"tolerance": -1.0}, "tolerance"),
        ({"min_decades": 0.0}, "min_decades"),
        ({"schema_version": 7}, "schema_version"),
        ({"trajectories": [TrajectoryConfig("ray", 1.5)]}, "trajectories[0].value"),
        ({"trajectories": [TrajectoryConfig("spiral", 1.0)]}, "trajectories[0].kind"),
        ({"data": DataConfig(profile="square")}, "data.profile"),
        ({"data": DataConfig(width=-1.0)}, "data"),
    ])
    def test_field_errors(self, over, field):
        with pytest.raises(ConfigError) as exc:
            RunConfig(**over).validate()
        assert exc.value.field == field

    def test_from_dict_errors(self):
        with pytest.raises(ConfigError) as exc:
            RunConfig.from_dict({"colour": 1})
        assert exc.value.field == "colour"
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"data": {"hue": 1}})
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"coupling": "big"})
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"modes": [0.5]})
        with pytest.raises(ConfigError):
            RunConfig.from_json("{not json")

    def test_save_load(self, tmp_path):
        cfg = small_cfg(tmp_path)
        cfg.save(tmp_path / "c.json")
        assert RunConfig.load(tmp_path / "c.json") == cfg


class TestSmallCommands:
    def test_rates_exceptional(self, capsys):
        assert main(["rates", "--problem", "wave", "--n", "3", "--coupling", "2"]) == EXIT_PASS
        out = capsys.readouterr().out
        assert "5.123106" in out and "exceptional (odd integer)" in out

    def test_rates_dirac_csv(self, capsys):
        assert main(["rates", "--problem", "dirac", "--Z", "0.45", "--format", "csv"]) == EXIT_PASS
        assert capsys.readouterr().out.startswith("mode,")

    def test_rates_errors(self, capsys):
        assert main(["rates", "--coupling", "-0.5"]) == EXIT_USAGE
        assert main(["rates", "--coupling", "0.75"]) == EXIT_USAGE
        assert main(["rates"]) == EXIT_USAGE
        assert main(["bogus"]) == EXIT_USAGE

    def test_resonances(self, capsys):
        assert main(["resonances", "--coupling", "1", "--jmax", "1", "--kmax", "2", "--numeric"]) == EXIT_PASS
        out = capsys.readouterr().out
        assert "-2.61803398875" in out and "max deviation" in out

    def test_hypergeo(self, capsys):
        assert main(["hypergeo", "--a", "1", "--b", "1", "--c", "2", "--x", "0.5"]) == EXIT_PASS
        assert "1.38629436111989" in capsys.readouterr().out
        assert main(["hypergeo", "--a", "1", "--b", "1", "--c", "-2", "--x", "0.5"]) == EXIT_USAGE

    def test_parse_complex(self):
        assert parse_complex("1.5") == 1.5
        assert parse_complex("1,2") == 1 + 2j
        assert parse_complex("0.5-1j") == 0.5 - 1j
        with pytest.raises(ValueError):
            parse_complex("abc")

    def test_thread_count(self, monkeypatch):
        monkeypatch.setenv("TAIL_LAB_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.delenv("TAIL_LAB_THREADS")
        assert thread_count() >= 1


class TestRuns:
    def test_determinism(self, tmp_path):
        a = run_simulation(small_cfg(tmp_path, "a", modes=[0, 1]))
        b = run_simulation(small_cfg(tmp_path, "b", modes=[0, 1]))
        files = sorted(p.name for p in a.glob("*.csv"))
        assert files == ["mode0_fixed_r_2.csv", "mode1_fixed_r_2.csv"]
        for name in files:
            assert (a / name).read_bytes() == (b / name).read_bytes()
        assert (a / name).read_text().splitlines()[0] == "t,re,im,trajectory_id"
        assert (a / COMPLETE_MARKER).exists() and (a / "run.log").read_text().strip()

    def test_reuse_and_conflict(self, tmp_path):
        cfg = small_cfg(tmp_path)
        run = run_simulation(cfg)
        stamp = (run / "mode0_fixed_r_2.csv").stat().st_mtime_ns
        assert run_simulation(cfg) == run
        assert (run / "mode0_fixed_r_2.csv").stat().st_mtime_ns == stamp
        with pytest.raises(ConfigError):
            run_simulation(small_cfg(tmp_path, coupling=2.0))
        run_simulation(small_cfg(tmp_path, coupling=2.0), force=True)

    def test_partial_run(self, tmp_path, capsys):
        cfg = small_cfg(tmp_path)
        run = run_simulation(cfg)
        (run / COMPLETE_MARKER).unlink()
        args = ["simulate", "--config", str(run / "config.json")]
        assert main(args) == EXIT_USAGE
        assert "partial run" in capsys.readouterr().err
        assert main(["verify", "--run", str(run)]) == EXIT_USAGE
        assert main(args + ["--force"]) == EXIT_PASS
        assert (run / COMPLETE_MARKER).exists()

    def test_zero_amplitude_below_floor(self, tmp_path, capsys):
        out = tmp_path / "zero"
        code = main(["verify", "--coupling", "1", "--amplitude", "0", "--t-max", "120", "--h", "0.04",
                     "--fixed-r", "2", "--out", str(out)])
        assert code == EXIT_FAIL
        t, v = read_series(out / "mode0_fixed_r_2.csv")
        assert np.all(v == 0)
        rep = json.loads((out / "report.json").read_text())
        assert rep["rows"][0]["verdict"] == "below floor"

    def test_verify_numeric_failure(self, tmp_path):
        cfg = small_cfg(tmp_path, t_lo=55.0)
        run = run_simulation(cfg)
        assert main(["verify", "--run", str(run)]) == EXIT_NUMERIC

    def test_config_error_exit(self, tmp_path):
        assert main(["simulate", "--coupling", "-1", "--out", str(tmp_path / "x")]) == EXIT_USAGE
        assert not (tmp_path / "x").exists()
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"problem": "wave", "warp": 9}))
        assert main(["simulate", "--config", str(bad)]) == EXIT_USAGE

    @pytest.mark.slow
    def test_verify_and_report(self, tmp_path, capsys):
        out = tmp_path / "f1"
        code = main(["verify", "--coupling", "1", "--t-max", "400", "--fixed-r", "2", "--ray", "0.5",
                     "--out", str(out)])
        assert code == EXIT_PASS
        rep = json.loads((out / "report.json").read_text())
        assert rep["passed"] and len(rep["rows"]) == 2
        assert main(["report", str(out), "--out", str(tmp_path / "rep")]) == EXIT_PASS
        svgs = sorted(Path(tmp_path / "rep").glob("*.svg"))
        assert len(svgs) == 2
        text = svgs[0].read_text()
        assert "<svg" in text and "stroke-dasharray" in text
