"""JSON run and sweep configurations.

A run configuration looks like::

    {
      "system": {"dim": 2, "bloch": {"r": 0.5, "theta": 0.0, "phi": 0.0}},
      "hamiltonian": {
        "segments": [{"kind": "constant", "duration": 6.283185307179586,
                      "H": [[0.5, 0], [0, -0.5]]}],
        "pulses": [{"time": 3.14159, "unitary": [[0, [0, -1]], [[0, -1], 0]]}]
      },
      "grid": {"steps": 4096},
      "tolerances": {"cyclic": 1e-8, "unwind_min_mag": 1e-8},
      "gauge": {"windings": [1, 0], "profile": "linear"},
      "mode": {"branch_mode": "anchored", "allow_noncyclic": false,
               "parallel_transport_lift": false, "endpoint_phase_fallback": false},
      "outputs": {"report_path": "report.json", "series_path": "series.csv"}
    }

Matrix entries are real numbers or ``[re, im]`` pairs, rows in order.
Sampled segments carry ``"table": {"times": [...], "matrices": [...]}``
keyed by absolute midpoint time.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DomainError, SchemaError
from .evolution import DEFAULT_STEPS, ConstantSegment, HamiltonianSpec, Pulse, SampledSegment
from .matcore import bloch_density
from .output import dumps_exact
from .phasecalc import BRANCH_MODES
from .gaugelab import PROFILES

SWEEP_PARAMETERS = ("tau", "r", "theta", "winding_k")


def default_steps() -> int:
    raw = os.environ.get("PHASE_DEFAULT_STEPS")
    if raw is None:
        return DEFAULT_STEPS
    try:
        steps = int(raw)
    except ValueError:
        raise SchemaError("/grid/steps", f"PHASE_DEFAULT_STEPS is not an integer: {raw!r}") from None
    if steps < 2:
        raise DomainError("PHASE_DEFAULT_STEPS must be at least 2")
    return steps


# -- field helpers -------------------------------------------------------------

def _get(obj: dict, key: str, ptr: str, required: bool = True, default: Any = None):
    if not isinstance(obj, dict):
        raise SchemaError(ptr, "expected an object")
    if key not in obj:
        if required:
            raise SchemaError(f"{ptr}/{key}", "missing required field")
        return default
    return obj[key]


def _number(value, ptr: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(ptr, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise DomainError(f"{ptr}: value must be finite")
    return float(value)


def _integer(value, ptr: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(ptr, f"expected an integer, got {type(value).__name__}")
    return int(value)


def _boolean(value, ptr: str) -> bool:
    if not isinstance(value, bool):
        raise SchemaError(ptr, f"expected a boolean, got {type(value).__name__}")
    return value


def _choice(value, options, ptr: str) -> str:
    if value not in options:
        raise SchemaError(ptr, f"expected one of {list(options)}, got {value!r}")
    return value


def parse_complex(value, ptr: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise SchemaError(ptr, "complex numbers are [re, im] pairs")
        return complex(_number(value[0], f"{ptr}/0"), _number(value[1], f"{ptr}/1"))
    return complex(_number(value, ptr))


def parse_matrix(value, dim: int, ptr: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != dim:
        raise SchemaError(ptr, f"expected {dim} rows")
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != dim:
            raise SchemaError(f"{ptr}/{i}", f"expected {dim} entries")
        for j, x in enumerate(row):
            out[i, j] = parse_complex(x, f"{ptr}/{i}/{j}")
    return out


def dump_matrix(m) -> list:
    return [
        [float(z.real) if z.imag == 0 else [float(z.real), float(z.imag)] for z in row]
        for row in np.asarray(m, dtype=complex)
    ]


# -- run configuration ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaugeConfig:
    windings: tuple
    profile: str


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated run configuration; ``document`` is the normalised JSON."""

    document: dict
    dim: int
    rho0: np.ndarray
    hamiltonian: HamiltonianSpec
    steps: int
    tol_cyclic: float
    unwind_min_mag: float
    gauge: GaugeConfig | None
    branch_mode: str
    allow_noncyclic: bool
    parallel_transport_lift: bool
    endpoint_phase_fallback: bool
    report_path: str
    series_path: str

    def to_json(self) -> str:
        return dumps_exact(self.document)

    def digest(self) -> str:
        canon = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _parse_system(doc: dict) -> tuple[int, np.ndarray, dict]:
    sysd = _get(doc, "system", "")
    dim = _integer(_get(sysd, "dim", "/system"), "/system/dim")
    if dim < 1:
        raise DomainError("/system/dim must be positive")
    has_rho = "rho0" in sysd
    has_bloch = "bloch" in sysd
    if has_rho == has_bloch:
        raise SchemaError("/system", "give exactly one of 'rho0' or 'bloch'")
    if has_bloch:
        if dim != 2:
            raise DomainError("/system/bloch is only valid for dim = 2")
        b = sysd["bloch"]
        r = _number(_get(b, "r", "/system/bloch"), "/system/bloch/r")
        theta = _number(_get(b, "theta", "/system/bloch"), "/system/bloch/theta")
        phi = _number(_get(b, "phi", "/system/bloch", False, 0.0), "/system/bloch/phi")
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"/system/bloch/r = {r} outside [0, 1]")
        norm = {"dim": 2, "bloch": {"r": r, "theta": theta, "phi": phi}}
        return dim, bloch_density(r, theta, phi), norm
    rho = parse_matrix(sysd["rho0"], dim, "/system/rho0")
    return dim, rho, {"dim": dim, "rho0": dump_matrix(rho)}


def _parse_segment(seg, dim: int, ptr: str):
    kind = _choice(_get(seg, "kind", ptr, False, "constant"), ("constant", "sampled"), f"{ptr}/kind")
    duration = _number(_get(seg, "duration", ptr), f"{ptr}/duration")
    if duration <= 0:
        raise DomainError(f"{ptr}/duration must be positive")
    if kind == "constant":
        h = parse_matrix(_get(seg, "H", ptr), dim, f"{ptr}/H")
        return ConstantSegment(duration, h), {"kind": "constant", "duration": duration, "H": dump_matrix(h)}
    table = _get(seg, "table", ptr)
    times = _get(table, "times", f"{ptr}/table")
    mats = _get(table, "matrices", f"{ptr}/table")
    if not isinstance(times, list) or not isinstance(mats, list) or len(times) != len(mats):
        raise SchemaError(f"{ptr}/table", "times and matrices must be lists of equal length")
    ts = [_number(t, f"{ptr}/table/times/{i}") for i, t in enumerate(times)]
    ms = [parse_matrix(m, dim, f"{ptr}/table/matrices/{i}") for i, m in enumerate(mats)]
    norm = {"kind": "sampled", "duration": duration,
            "table": {"times": ts, "matrices": [dump_matrix(m) for m in ms]}}
    return SampledSegment(duration, dict(zip(ts, ms))), norm


def _parse_hamiltonian(doc: dict, dim: int) -> tuple[HamiltonianSpec, dict]:
    ham = _get(doc, "hamiltonian", "")
    segs = _get(ham, "segments", "/hamiltonian")
    if not isinstance(segs, list) or not segs:
        raise SchemaError("/hamiltonian/segments", "expected a non-empty list")
    parsed = [_parse_segment(s, dim, f"/hamiltonian/segments/{i}") for i, s in enumerate(segs)]
    pulses_raw = _get(ham, "pulses", "/hamiltonian", False, [])
    if not isinstance(pulses_raw, list):
        raise SchemaError("/hamiltonian/pulses", "expected a list")
    pulses, pnorm = [], []
    for i, p in enumerate(pulses_raw):
        ptr = f"/hamiltonian/pulses/{i}"
        t = _number(_get(p, "time", ptr), f"{ptr}/time")
        u = parse_matrix(_get(p, "unitary", ptr), dim, f"{ptr}/unitary")
        pulses.append(Pulse(t, u))
        pnorm.append({"time": t, "unitary": dump_matrix(u)})
    try:
        spec = HamiltonianSpec(dim, tuple(s for s, _ in parsed), tuple(pulses))
    except Exception as exc:  # re-labelled as a domain problem of the config
        raise DomainError(f"/hamiltonian: {exc}") from exc
    return spec, {"segments": [n for _, n in parsed], "pulses": pnorm}


def parse_document(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise SchemaError("", "configuration must be a JSON object")
    dim, rho, sys_norm = _parse_system(doc)
    # validate the presence of the hamiltonian before anything else downstream
    spec, ham_norm = _parse_hamiltonian(doc, dim)

    grid = _get(doc, "grid", "", False, {})
    steps = _get(grid, "steps", "/grid", False, None)
    steps = default_steps() if steps is None else _integer(steps, "/grid/steps")
    if steps < 2:
        raise DomainError("/grid/steps must be at least 2")

    tols = _get(doc, "tolerances", "", False, {})
    tol_cyc = _number(_get(tols, "cyclic", "/tolerances", False, 1e-8), "/tolerances/cyclic")
    min_mag = _number(_get(tols, "unwind_min_mag", "/tolerances", False, 1e-8), "/tolerances/unwind_min_mag")
    if tol_cyc <= 0 or min_mag <= 0:
        raise DomainError("/tolerances: values must be positive")

    gauge = None
    g = _get(doc, "gauge", "", False, None)
    if g is not None:
        wind = _get(g, "windings", "/gauge")
        if not isinstance(wind, list):
            raise SchemaError("/gauge/windings", "expected a list of integers")
        wind = tuple(_integer(n, f"/gauge/windings/{i}") for i, n in enumerate(wind))
        if len(wind) != dim:
            raise DomainError(f"/gauge/windings: need {dim} entries, got {len(wind)}")
        prof = _choice(_get(g, "profile", "/gauge", False, "linear"), PROFILES, "/gauge/profile")
        gauge = GaugeConfig(wind, prof)

    mode = _get(doc, "mode", "", False, {})
    branch = _choice(_get(mode, "branch_mode", "/mode", False, "anchored"), BRANCH_MODES, "/mode/branch_mode")
    allow = _boolean(_get(mode, "allow_noncyclic", "/mode", False, False), "/mode/allow_noncyclic")
    lift = _boolean(_get(mode, "parallel_transport_lift", "/mode", False, False), "/mode/parallel_transport_lift")
    fallback = _boolean(
        _get(mode, "endpoint_phase_fallback", "/mode", False, False), "/mode/endpoint_phase_fallback"
    )

    outs = _get(doc, "outputs", "", False, {})
    report = _get(outs, "report_path", "/outputs", False, "report.json")
    series = _get(outs, "series_path", "/outputs", False, "series.csv")
    for key, val in (("report_path", report), ("series_path", series)):
        if not isinstance(val, str) or not val:
            raise SchemaError(f"/outputs/{key}", "expected a non-empty string")

    norm = {
        "system": sys_norm,
        "hamiltonian": ham_norm,
        "grid": {"steps": steps},
        "tolerances": {"cyclic": tol_cyc, "unwind_min_mag": min_mag},
        "gauge": None if gauge is None else {"windings": list(gauge.windings), "profile": gauge.profile},
        "mode": {
            "branch_mode": branch,
            "allow_noncyclic": allow,
            "parallel_transport_lift": lift,
            "endpoint_phase_fallback": fallback,
        },
        "outputs": {"report_path": report, "series_path": series},
    }
    return RunConfig(
        norm, dim, rho, spec, steps, tol_cyc, min_mag, gauge, branch, allow, lift, fallback, report, series
    )


def _load(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    return parse_document(_load(text))


# -- sweeps --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepConfig:
    base: RunConfig
    parameter: str
    start: float
    stop: float
    points: int
    output: str
    level: int = 0
    document: dict | None = None

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


def parse_sweep(text: str) -> SweepConfig:
    doc = _load(text)
    if not isinstance(doc, dict):
        raise SchemaError("", "sweep configuration must be a JSON object")
    base_doc = _get(doc, "base", "")
    try:
        base = parse_document(base_doc)
    except SchemaError as exc:
        raise SchemaError("/base" + exc.pointer.rstrip("/"), exc.message) from exc
    param = _choice(_get(doc, "parameter", ""), SWEEP_PARAMETERS, "/parameter")
    rng = _get(doc, "range", "")
    start = _number(_get(rng, "from", "/range"), "/range/from")
    stop = _number(_get(rng, "to", "/range"), "/range/to")
    points = _integer(_get(rng, "points", "/range"), "/range/points")
    if points < 2:
        raise SchemaError("/range/points", "a sweep needs at least 2 points")
    output = _get(doc, "output", "", False, "sweep.csv")
    if not isinstance(output, str) or not output:
        raise SchemaError("/output", "expected a non-empty string")
    level = _integer(_get(doc, "level", "", False, 0), "/level")

    if param in ("r", "theta") and "bloch" not in base.document["system"]:
        raise SchemaError("/base/system/bloch", f"sweeping {param!r} needs a Bloch-form system")
    if param == "r" and not (0 <= min(start, stop) and max(start, stop) <= 1):
        raise DomainError("/range: r must stay within [0, 1]")
    if param == "tau" and min(start, stop) <= 0:
        raise DomainError("/range: tau must be positive")
    if param == "winding_k":
        if base.gauge is None:
            raise SchemaError("/base/gauge", "sweeping winding_k needs a gauge block")
        if not 0 <= level < base.dim:
            raise DomainError(f"/level must be in [0, {base.dim})")
        vals = np.linspace(start, stop, points)
        if np.any(np.abs(vals - np.round(vals)) > 1e-9):
            raise DomainError("/range: winding_k values must be integers")
    norm = {"base": base.document, "parameter": param,
            "range": {"from": start, "to": stop, "points": points}, "level": level, "output": output}
    return SweepConfig(base, param, start, stop, points, output, level, norm)


def with_parameter(base: RunConfig, parameter: str, value: float, level: int = 0) -> RunConfig:
    """Copy of ``base`` with one sweep parameter replaced."""
    doc = copy.deepcopy(base.document)
    if parameter in ("r", "theta"):
        doc["system"]["bloch"][parameter] = float(value)
    elif parameter == "tau":
        scale = float(value) / base.hamiltonian.tau
        for seg in doc["hamiltonian"]["segments"]:
            seg["duration"] *= scale
            if seg["kind"] == "sampled":
                seg["table"]["times"] = [t * scale for t in seg["table"]["times"]]
        for p in doc["hamiltonian"]["pulses"]:
            p["time"] *= scale
    elif parameter == "winding_k":
        doc["gauge"]["windings"][level] = int(round(value))
    else:
        raise SchemaError("/parameter", f"unknown sweep parameter {parameter!r}")
    return parse_document(doc)
