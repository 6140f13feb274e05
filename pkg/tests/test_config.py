import json
import math

import numpy as np
import pytest

from geophase.config import default_steps, parse_config, parse_sweep, with_parameter
from geophase.errors import DomainError, SchemaError
from geophase.scenarios import precession_document, scenario_echo, scenario_gauge_demo, scenario_precession

MINIMAL = {
    "system": {"dim": 2, "bloch": {"r": 0.5, "theta": 0, "phi": 0}},
    "hamiltonian": {"segments": [{"kind": "constant", "duration": 6.283185307179586, "H": [[0.5, 0], [0, -0.5]]}]},
}


def _text(**overrides):
    doc = json.loads(json.dumps(MINIMAL))
    doc.update(overrides)
    return json.dumps(doc)


def test_minimal_config_defaults():
    cfg = parse_config(_text())
    assert np.allclose(cfg.rho0, np.diag([0.75, 0.25]))
    assert cfg.steps == 4096
    assert cfg.tol_cyclic == 1e-8
    assert cfg.branch_mode == "anchored"
    assert cfg.gauge is None


def test_missing_hamiltonian_pointer():
    doc = dict(MINIMAL)
    del doc["hamiltonian"]
    with pytest.raises(SchemaError) as info:
        parse_config(json.dumps(doc))
    assert info.value.pointer == "/hamiltonian"


def test_radius_out_of_range():
    with pytest.raises(DomainError):
        parse_config(_text(system={"dim": 2, "bloch": {"r": 1.2, "theta": 0, "phi": 0}}))


def test_bloch_needs_qubit():
    with pytest.raises(DomainError):
        parse_config(_text(system={"dim": 3, "bloch": {"r": 0.2, "theta": 0}}))


def test_ill_typed_field_pointer():
    with pytest.raises(SchemaError) as info:
        parse_config(_text(grid={"steps": "many"}))
    assert info.value.pointer == "/grid/steps"


def test_complex_entries_and_explicit_rho():
    cfg = parse_config(_text(
        system={"dim": 2, "rho0": [[0.5, [0, -0.25]], [[0, 0.25], 0.5]]},
    ))
    assert cfg.rho0[0, 1] == -0.25j


def test_invalid_json():
    with pytest.raises(SchemaError):
        parse_config("{not json")


def test_environment_overrides_default_steps(monkeypatch):
    monkeypatch.setenv("PHASE_DEFAULT_STEPS", "512")
    assert default_steps() == 512
    assert parse_config(_text()).steps == 512


def test_round_trip_is_stable():
    cfg = scenario_echo(1.0, 2 * math.pi)
    again = parse_config(cfg.to_json())
    assert again.to_json() == cfg.to_json()
    assert again.digest() == cfg.digest()


def test_scenario_domain_checks():
    with pytest.raises(DomainError):
        scenario_echo(1.0, 0.0)
    with pytest.raises(DomainError):
        scenario_precession(1.5, 0.0)
    with pytest.raises(DomainError):
        scenario_precession(0.5, 0.0, turns=0)


def test_gauge_demo_block():
    cfg = scenario_gauge_demo((1, 0))
    assert cfg.gauge.windings == (1, 0)


def _sweep(parameter, start, stop, points, **extra):
    doc = {"base": precession_document(0.5, 0.0, 1.0, 1), "parameter": parameter,
           "range": {"from": start, "to": stop, "points": points}}
    doc.update(extra)
    return json.dumps(doc)


def test_sweep_values():
    sw = parse_sweep(_sweep("r", 0, 1, 11))
    assert np.allclose(sw.values(), np.linspace(0, 1, 11))


def test_sweep_empty_range_rejected():
    with pytest.raises(SchemaError):
        parse_sweep(_sweep("r", 0, 1, 0))


def test_sweep_unknown_parameter():
    with pytest.raises(SchemaError) as info:
        parse_sweep(_sweep("omega", 0, 1, 3))
    assert info.value.pointer == "/parameter"


def test_with_parameter_tau_scales_pulses():
    base = scenario_echo(1.0, 2.0)
    cfg = with_parameter(base, "tau", 4.0)
    assert cfg.hamiltonian.tau == pytest.approx(4.0)
    assert [p.time for p in cfg.hamiltonian.pulses] == pytest.approx([2.0, 4.0])


def test_winding_sweep_requires_gauge():
    with pytest.raises(SchemaError):
        parse_sweep(_sweep("winding_k", 0, 2, 3))
