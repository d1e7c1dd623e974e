import csv
import json

import pytest
import yaml

from worldline.cli import CSV_COLUMNS, main
from worldline.config import ConfigError, from_mapping, load_config


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def _write(tmp_path, doc, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return str(p)


def test_parse(tmp_path, capsys):
    assert run(tmp_path, "parse", "--config", "nine_particles") == 0
    doc = json.loads((tmp_path / "parse.json").read_text())
    assert (doc["n"], doc["m"], doc["N"]) == (3, 3, 9)
    assert "F1 =" in capsys.readouterr().out


def test_eliminate_prints_leading_coefficient(tmp_path, capsys):
    assert run(tmp_path, "eliminate", "--config", "six_particles") == 0
    out = capsys.readouterr().out
    assert "-358343" in out
    doc = json.loads((tmp_path / "eliminants.json").read_text())
    assert doc["leading_R_y"] == doc["leading_R_x"] == "-358343"
    assert doc["D_degree"] == 18 and len(doc["D_real_roots"]) == 2


def test_simulate_csv(tmp_path):
    assert run(tmp_path, "simulate", "--config", "six_particles", "--steps", "25") == 0
    with (tmp_path / "trajectory.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) - 1 == 25 * 6
    for r in rows[1:]:
        assert r[-1] in ("0", "1")
        if r[-1] == "1":
            assert r[7:15] == [""] * 8


def test_flagged_rows_are_kept(tmp_path):
    # the grid 4 .. 4.6 puts no point on an event; a range ending on one flags the last sample
    from worldline.dynamics import detect_events
    cfg = load_config("six_particles")
    ev = detect_events(cfg.system, (3, 6))[0]
    mid = (ev.t_star[0] + ev.t_star[1]) / 2
    assert run(tmp_path, "simulate", "--config", "six_particles", "--steps", "5",
               "--t-range", "4", f"{mid.numerator}/{mid.denominator}") == 0
    with (tmp_path / "trajectory.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 30
    assert {r["near_event"] for r in rows[-6:]} == {"1"}
    assert all(r["re_vx"] == "" for r in rows[-6:])


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["simulate", "--config", "nine_particles", "--steps", "30", "--out", str(d)]) == 0
        assert main(["events", "--config", "nine_particles", "--out", str(d)]) == 0
        assert main(["audit", "--config", "nine_particles", "--steps", "30", "--out", str(d)]) == 0
    for name in ("trajectory.csv", "events.json", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_audit_report(tmp_path):
    assert run(tmp_path, "audit", "--config", "nine_particles", "--steps", "40") == 0
    doc = {r["law"]: r for r in json.loads((tmp_path / "report.json").read_text())}
    assert doc["energy"]["expected"] == {"exact": "0", "approx": 0.0}
    assert doc["angular_momentum"]["expected"]["exact"] == "0"
    assert doc["momentum"]["expected"]["exact"] == "(0, 0)"
    assert all(r["verdict"] == "pass" for r in doc.values())
    assert set(doc["energy"]) == {"law", "expected", "max_drift", "verdict"}


def test_audit_failure_exit_code(tmp_path):
    assert run(tmp_path, "audit", "--config", "nine_particles", "--steps", "20", "--tol-energy", "1e-300") == 1


def test_events(tmp_path):
    assert run(tmp_path, "events", "--config", "six_particles") == 0
    evs = json.loads((tmp_path / "events.json").read_text())
    assert [e["kind"] for e in evs] == ["annihilation", "creation"]
    assert all("/" in e["t_lo"] for e in evs)


def test_angular_numeric(tmp_path):
    assert run(tmp_path, "angular", "--config", "six_particles", "--steps", "20") == 0
    doc = json.loads((tmp_path / "angular.json").read_text())
    assert doc["numeric"]["reference"] == pytest.approx(-827188 / 358343, rel=1e-8)


def test_reversed_range_is_a_config_error(tmp_path):
    assert run(tmp_path, "simulate", "--config", "nine_particles", "--t-range", "1", "0") == 2


@pytest.mark.parametrize("doc", [
    {"F1": "x - t", "F2": "y", "t_start": 0, "t_end": 1, "colour": "red"},
    {"F1": "x - t", "F2": "y", "t_start": 0},
    {"F1": "x - t", "F2": "y +", "t_start": 0, "t_end": 1},
    {"F1": "x - t", "F2": "y", "t_start": 0, "t_end": 1, "steps": 1},
    {"F1": "x - t", "F2": "y", "t_start": 0, "t_end": 1, "tolerances": {"bogus": 1}},
    {"F1": "x - t", "F2": "y", "t_start": 0, "t_end": 1, "out": "a", "outputs": "b"},
])
def test_bad_configs(tmp_path, doc):
    assert run(tmp_path, "parse", "--config", _write(tmp_path, doc)) == 2
    with pytest.raises(ConfigError):
        from_mapping(doc)


def test_missing_config_file(tmp_path):
    assert run(tmp_path, "parse", "--config", str(tmp_path / "nope.yaml")) == 2


def test_degenerate_system(tmp_path):
    doc = {"F1": "x*y + x + 1", "F2": "x*y + y + t", "t_start": 0, "t_end": 1}
    assert run(tmp_path, "eliminate", "--config", _write(tmp_path, doc)) == 3


def test_config_values():
    cfg = from_mapping({"F1": "x - t", "F2": "y - 2*t", "t_start": "1/3", "t_end": 0.5,
                        "tolerances": {"energy": 1e-5, "tol_pair": 1e-6}, "outputs": "res"})
    assert str(cfg.t_start) == "1/3" and str(cfg.t_end) == "1/2"
    assert cfg.tolerances == {"tol_energy": 1e-5, "tol_pair": 1e-6}
    assert str(cfg.out) == "res"
