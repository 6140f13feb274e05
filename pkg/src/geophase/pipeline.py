"""Run and sweep orchestration behind the ``phase`` command."""

from __future__ import annotations

import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .config import RunConfig, SweepConfig, parse_document, with_parameter
from .errors import NearZeroCrossing, NotCyclic, PhaseError
from .evolution import check_cyclic, check_global_cyclic, grid_for_steps, propagate
from .gaugelab import build_diagonal_gauge, gauge_shift_report, parallel_transport_lift, pt_defect
from .matcore import principal_angle, validate_density
from .output import commit, csv_text, discard, dumps_report, stage
from .phasecalc import geometric_phase, per_level_phases

SERIES_HEADER = ["t", "re_trace", "im_trace", "phi_running", "phi_dyn_running", "beta_cumulative"]
SWEEP_HEADER = [
    "parameter", "value", "phi_total", "phi_dyn", "phi_geo", "weighted_geo",
    "cyclic_residual", "exit_code", "error",
]


@dataclass(frozen=True, eq=False)
class RunResult:
    report: dict
    series: list
    phase: object
    per_level: object
    gauge: object


def _opt(x):
    return None if x is None else float(x)


def evaluate(config: RunConfig) -> RunResult:
    """Execute the full pipeline in memory; raises on failure."""
    rho0 = validate_density(config.rho0)
    grid = grid_for_steps(config.hamiltonian, config.steps)
    path = propagate(config.hamiltonian, grid)
    kw = {"min_magnitude": config.unwind_min_mag, "endpoint_fallback": config.endpoint_phase_fallback}
    notes: list[str] = []

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cyc = check_cyclic(path, rho0, config.tol_cyclic)
        if not cyc.cyclic and not config.allow_noncyclic:
            raise NotCyclic(
                f"evolution is not cyclic (state residual {cyc.state_residual:.3g}, "
                f"commutator residual {cyc.commutator_residual:.3g}, tol {config.tol_cyclic:g})"
            )
        lift = None
        if config.parallel_transport_lift:
            before = pt_defect(path, rho0).max_integral
            path = parallel_transport_lift(path, rho0)
            lift = {"applied": True, "max_defect_integral_before": before,
                    "max_defect_integral_after": pt_defect(path, rho0).max_integral}

        phase = geometric_phase(path, rho0, config.tol_cyclic, config.allow_noncyclic, **kw)
        levels = per_level_phases(
            path, rho0, config.branch_mode, config.unwind_min_mag,
            phi_total=phase.phi_total,
        )
        try:
            glob = check_global_cyclic(path, rho0, config.tol_cyclic, config.unwind_min_mag)
        except (NotCyclic, NearZeroCrossing) as exc:
            glob = None
            notes.append(f"global cyclicity not assessed: {exc}")

        shift = None
        if config.gauge is not None:
            gauge = build_diagonal_gauge(rho0.spectrum, path, config.gauge.windings, config.gauge.profile)
            shift = gauge_shift_report(path, rho0, gauge, config.tol_cyclic, before=phase, **kw)
    notes.extend(str(w.message) for w in caught)

    report = {
        "tool": "geophase",
        "provenance": {
            "config_sha256": config.digest(),
            "grid_steps": int(grid.steps),
            "path_nodes": int(len(path.times)),
            "tool_version": __version__,
        },
        "phase": {
            "phi_total": phase.phi_total,
            "phi_total_principal": phase.phi_total_principal,
            "phi_dyn": phase.phi_dyn,
            "phi_dyn_fd": phase.phi_dyn_fd,
            "phi_geo": phase.phi_geo,
            "phi_geo_principal": phase.phi_geo_principal,
            "phi_geo_oneform": _opt(phase.phi_geo_oneform),
            "route_discrepancy": _opt(phase.route_discrepancy),
            "oneform_imag_residue": _opt(phase.oneform_imag_residue),
            "total_phase_mode": phase.total_phase_mode,
        },
        "cyclicity": {
            "state_residual": phase.cyclicity.state_residual,
            "commutator_residual": phase.cyclicity.commutator_residual,
            "cyclic": phase.cyclicity.cyclic,
            "tol": phase.cyclicity.tol,
        },
        "global_cyclicity": None if glob is None else {
            "endpoint_distance": glob.endpoint_distance,
            "endpoint_phase": _opt(glob.endpoint_phase),
            "endpoint_global": glob.endpoint_global,
            "unwound_level_phases": list(glob.unwound_level_phases),
            "unwound_global": glob.unwound_global,
        },
        "per_level": {
            "branch_mode": levels.branch_mode,
            "weights": levels.weights.tolist(),
            "level_total": levels.level_total.tolist(),
            "level_dyn": levels.level_dyn.tolist(),
            "level_geo": levels.level_geo.tolist(),
            "weighted_geo": levels.weighted_geo,
            "weighted_dyn": levels.weighted_dyn,
        },
        "parallel_transport": lift or {"applied": False},
        "gauge": None if shift is None else {
            "windings": list(config.gauge.windings),
            "profile": config.gauge.profile,
            "kind": shift.classification.kind.value,
            "uniform_windings": shift.classification.uniform_windings,
            "phi_geo_before": shift.phi_geo_before,
            "phi_geo_after": shift.phi_geo_after,
            "observed_shift": shift.observed_shift,
            "observed_shift_principal": principal_angle(shift.observed_shift),
            "endpoint_shift": shift.endpoint_shift,
            "predicted_shift": shift.predicted_shift,
            "shift_residual": shift.shift_residual,
            "shift_residual_mod_2pi": shift.shift_residual_mod_2pi,
            "phi_total_shift": shift.phi_total_shift,
            "phi_dyn_shift": shift.phi_dyn_shift,
            "endpoint_global_after": shift.endpoint_global_after,
            "unwound_global_after": shift.unwound_global_after,
            "unwound_level_phases_after": list(shift.unwound_level_phases_after),
        },
        "warnings": notes,
    }
    s = phase.running_series
    series = [
        [float(t), float(c.real), float(c.imag), float(a), float(b), float(g)]
        for t, c, a, b, g in zip(s.t, s.trace, s.phi_running, s.phi_dyn_running, s.beta_cumulative)
    ]
    return RunResult(report, series, phase, levels, shift)


def _resolve(path: str, out_dir) -> Path:
    p = Path(path)
    if out_dir is not None and not p.is_absolute():
        p = Path(out_dir) / p
    return p


def run(config: RunConfig, out_dir=None, figure: bool = False) -> int:
    """Execute ``config`` and write its report and series; return exit code."""
    try:
        result = evaluate(config)
    except PhaseError as exc:
        print(f"phase: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    report_path = _resolve(config.report_path, out_dir)
    series_path = _resolve(config.series_path, out_dir)
    staged = []
    try:
        staged.append((stage(report_path, dumps_report(result.report)), report_path))
        staged.append((stage(series_path, csv_text(SERIES_HEADER, result.series)), series_path))
        commit(staged)
    except OSError as exc:
        discard(staged)
        print(f"phase: cannot write outputs: {exc}", file=sys.stderr)
        return 2
    if figure:
        from .plotting import plot_series

        plot_series(result.phase.running_series, series_path.with_suffix(".png"))
    return 0


def _sweep_point(args) -> list:
    document, parameter, value, level = args
    base = parse_document(document)
    try:
        cfg = with_parameter(base, parameter, value, level)
        res = evaluate(cfg)
    except PhaseError as exc:
        nan = math.nan
        return [parameter, float(value), nan, nan, nan, nan, nan, exc.exit_code, f"{type(exc).__name__}: {exc}"]
    ph, lv = res.phase, res.per_level
    resid = max(ph.cyclicity.state_residual, ph.cyclicity.commutator_residual)
    return [parameter, float(value), ph.phi_total, ph.phi_dyn, ph.phi_geo, lv.weighted_geo, resid, 0, ""]


def sweep_rows(config: SweepConfig, workers: int = 1) -> list[list]:
    jobs = [(config.base.document, config.parameter, float(v), config.level) for v in config.values()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def sweep(config: SweepConfig, out_dir=None, workers: int = 1, figure: bool = False) -> int:
    rows = sweep_rows(config, workers)
    target = _resolve(config.output, out_dir)
    try:
        commit([(stage(target, csv_text(SWEEP_HEADER, rows)), target)])
    except OSError as exc:
        print(f"phase: cannot write sweep output: {exc}", file=sys.stderr)
        return 2
    for row in rows:
        if row[7]:
            print(f"phase: {config.parameter}={row[1]:.6g}: {row[8]}", file=sys.stderr)
    if figure:
        from .plotting import plot_sweep

        plot_sweep(config.parameter, rows, target.with_suffix(".png"))
    return 0
