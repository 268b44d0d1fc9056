import json
import pytest
import pandas as pd
from mirrorpark import cli
import mirrorpark.selftest as selftest
from mirrorpark.config import Config, ConfigError
from mirrorpark.evaluate.sweep import OUTCOME_COLUMNS

import logging
log = logging.getLogger()


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("KIND: angle\nSEED: 4\nMIRROR_MARGIN: 0.5\n")
    args = cli.build_parser().parse_args(["sweep", "--config", str(path), "--seed", "7",
                                          "--sw", "2.9"])
    config = cli.make_config(args)
    assert config.KIND == "angle"
    assert config.SEED == 7
    assert config.SW == 2.9
    assert config.MIRROR_MARGIN == 0.5


def test_literal_flag():
    args = cli.build_parser().parse_args(["plan", "--literal-paper"])
    config = cli.make_config(args)
    assert config.LITERAL_PAPER
    assert not config.RELINEARIZE_HEADING
    assert config.Q_DIAG[3] == 0.0


def test_unknown_config_key(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("kind: reverse\n")
    with pytest.raises(ConfigError):
        Config.load(str(path))
    assert cli.main(["plan", "--config", str(path)]) == 1


def test_malformed_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("KIND: [reverse\n")
    assert cli.main(["plan", "--config", str(path)]) == 1
    assert cli.main(["plan", "--config", str(tmp_path / "missing.yaml")]) == 1


@pytest.mark.parametrize("argv", [["plan", "--rw", "wide"], ["sweep", "--sampler", "some"],
                                  ["fly"]])
def test_bad_flags(argv):
    with pytest.raises(SystemExit) as e:
        cli.main(argv)
    assert e.value.code == 1


def test_bad_values():
    assert cli.main(["plan", "--kind", "garage"]) == 1
    assert cli.main(["plan", "--kind", "all"]) == 1
    assert cli.main(["plan", "--y0", "20"]) == 1


def test_plan_mirror_infeasible(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("MIRROR_FALLBACK: false\n")
    out = tmp_path / "plan"
    code = cli.main(["plan", "--config", str(path), "--kind", "reverse", "--rw", "6",
                     "--y0", "4.5", "--out", str(out)])
    assert code == 2
    outcome = json.loads((out / "outcome.json").read_text())
    assert outcome["reason"] == "mirror_infeasible"
    assert not outcome["success"]
    assert len(pd.read_csv(out / "trace.csv")) == 1
    assert (out / "trajectory.svg").exists()


def test_sweep_empty_grid(tmp_path):
    # the only case starts on the slot flank
    code = cli.main(["sweep", "--kind", "parallel", "--rw", "4.5", "--sl", "6.5",
                     "--theta0", "0", "--y0", "0", "--jobs", "1", "--out", str(tmp_path)])
    assert code == 1


def test_report(tmp_path, capsys):
    rows = pd.DataFrame([dict(kind="reverse", RW=6.0, SL=4.82, SW=2.9, theta0=0.0, y0=2.0,
                              y1=3.165, success=True, reason="parked", switches=1,
                              duration_s=12.5, replans=1, mean_plan_ms=40.0)])
    rows[OUTCOME_COLUMNS].to_csv(tmp_path / "outcomes.csv", index=False)
    assert cli.main(["report", "--out", str(tmp_path)]) == 0
    assert "success_rate=1.00" in capsys.readouterr().out
    aggregates = json.loads((tmp_path / "aggregates.json").read_text())
    assert aggregates["cases"] == 1
    assert aggregates["odd_cells"] == 1


def test_report_missing(tmp_path):
    assert cli.main(["report", "--out", str(tmp_path)]) == 1


@pytest.fixture()
def quick_suites(monkeypatch):
    suites = dict(bands=selftest.band_suite,
                  reflection=lambda tol: selftest.reflection_suite(tol, cases=20))
    monkeypatch.setattr(selftest, "SUITES", suites)


def test_selftest(quick_suites):
    assert cli.main(["selftest"]) == 0


def test_selftest_bad_tolerance(quick_suites):
    assert cli.main(["selftest", "--tol", "-1"]) == 1


@pytest.mark.slow
def test_selftest_full():
    assert selftest.run_selftest()


def test_plan_nominal_reverse(tmp_path):
    assert cli.main(["plan", "--kind", "reverse", "--out", str(tmp_path)]) == 0
    outcome = json.loads((tmp_path / "outcome.json").read_text())
    assert outcome["reason"] == "parked"


def test_display_lists_settings(capsys):
    config = Config()
    config.display()
    out = capsys.readouterr().out
    assert "mirrorpark settings:" in out
    rows = [line.split() for line in out.splitlines() if line.strip()][1:]
    assert [row[0] for row in rows] == config.keys()
    assert "R_MIN" not in config.keys()
    assert config.R_MIN > 0
