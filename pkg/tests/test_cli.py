import csv
import json
import math

import pytest

from geophase.cli import main
from geophase.config import parse_config
from geophase.scenarios import precession_document


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_precession_run(tmp_path):
    assert main(["scenario", "precession", "--r", "0.5", "--out", str(tmp_path)]) == 0
    ph = _report(tmp_path)["phase"]
    assert ph["phi_total"] == pytest.approx(-math.pi, abs=1e-6)
    assert ph["phi_dyn"] == pytest.approx(-math.pi / 2, abs=1e-6)
    assert ph["phi_geo"] == pytest.approx(-math.pi / 2, abs=1e-6)


def test_series_rows_match_nodes(tmp_path):
    main(["scenario", "precession", "--out", str(tmp_path)])
    rep = _report(tmp_path)
    with open(tmp_path / "series.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "re_trace", "im_trace", "phi_running", "phi_dyn_running", "beta_cumulative"]
    assert len(rows) - 1 == rep["provenance"]["path_nodes"]


def test_report_is_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["scenario", "precession", "--theta", "0.4", "--out", str(a)])
    main(["scenario", "precession", "--theta", "0.4", "--out", str(b)])
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()


def test_noncyclic_exit_code_and_no_outputs(tmp_path):
    doc = precession_document(0.5, 0.3, 1.0, 1)
    doc["hamiltonian"]["segments"][0]["duration"] *= 1.01
    assert main(["run", _write(tmp_path, "c.json", doc), "--out", str(tmp_path / "o")]) == 3
    assert not (tmp_path / "o" / "report.json").exists()


def test_maximally_mixed_is_numerical_failure(tmp_path):
    assert main(["scenario", "precession", "--r", "0", "--out", str(tmp_path)]) == 4


def test_config_errors_exit_two(tmp_path, capsys):
    doc = precession_document(0.5, 0.0, 1.0, 1)
    del doc["hamiltonian"]
    assert main(["run", _write(tmp_path, "c.json", doc)]) == 2
    assert "/hamiltonian" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_gauge_block_in_report(tmp_path):
    assert main(["scenario", "gauge-demo", "--windings", "1", "0", "--out", str(tmp_path)]) == 0
    g = _report(tmp_path)["gauge"]
    assert g["kind"] == "DiagonalNonAbelian"
    assert g["endpoint_shift"] == pytest.approx(3 * math.pi / 2, abs=1e-7)
    assert g["unwound_global_after"] is False
    assert g["endpoint_global_after"] is True


def test_emit_config_round_trip(capsys):
    assert main(["scenario", "echo", "--emit-config"]) == 0
    text = capsys.readouterr().out
    assert parse_config(text).to_json() == text


def test_echo_suppresses_dynamical_phase(tmp_path):
    assert main(["scenario", "echo", "--out", str(tmp_path / "e")]) == 0
    assert main(["scenario", "echo", "--no-pulses", "--out", str(tmp_path / "p")]) == 0
    echo = _report(tmp_path / "e")["phase"]["phi_dyn"]
    plain = _report(tmp_path / "p")["phase"]["phi_dyn"]
    assert abs(echo) <= 1e-6
    assert plain == pytest.approx(-math.pi / 2, abs=1e-9)


def _sweep_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_radius_over_lifted_tilted_precession(tmp_path):
    theta = math.pi / 4
    base = precession_document(0.5, theta, 1.0, 1)
    base["mode"] = {"parallel_transport_lift": True}
    doc = {"base": base, "parameter": "r", "range": {"from": 0, "to": 1, "points": 11}, "output": "r.csv"}
    assert main(["sweep", _write(tmp_path, "s.json", doc), "--out", str(tmp_path), "--workers", "2"]) == 0
    rows = _sweep_rows(tmp_path / "r.csv")
    assert len(rows) == 11
    assert rows[0]["exit_code"] != "0"
    omega = 2 * math.pi * (1 - math.cos(theta))
    for row in rows[1:]:
        r = float(row["value"])
        target = -math.atan(r * math.tan(omega / 2))
        assert abs(math.remainder(float(row["phi_geo"]) - target, 2 * math.pi)) < 1e-4


def test_sweep_turns_accumulate(tmp_path):
    doc = {"base": precession_document(0.5, 0.0, 1.0, 1), "parameter": "tau",
           "range": {"from": 2 * math.pi, "to": 6 * math.pi, "points": 3}, "output": "t.csv"}
    assert main(["sweep", _write(tmp_path, "s.json", doc), "--out", str(tmp_path)]) == 0
    geo = [float(r["phi_geo"]) for r in _sweep_rows(tmp_path / "t.csv")]
    assert geo == pytest.approx([-math.pi / 2, -math.pi, -3 * math.pi / 2], abs=1e-6)


def test_sweep_empty_range_exit_two(tmp_path):
    doc = {"base": precession_document(0.5, 0.0, 1.0, 1), "parameter": "r",
           "range": {"from": 0, "to": 1, "points": 0}}
    assert main(["sweep", _write(tmp_path, "s.json", doc)]) == 2


def test_figure_flag_writes_png(tmp_path):
    assert main(["scenario", "precession", "--out", str(tmp_path), "--figure"]) == 0
    assert (tmp_path / "series.png").stat().st_size > 0
