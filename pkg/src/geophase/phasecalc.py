"""Total, dynamical and geometric phases of a cyclic mixed-state evolution.

Two independent routes give the geometric phase:

* difference route: unwound ``arg Tr[rho0 U(t)]`` minus the dynamical phase
  ``-int Tr[rho(t) H(t)] dt`` evaluated with midpoint energies;
* one-form route: the stepwise sum of ``dphi + i Tr[rho0 U^dag dU]`` where
  ``U^dag dU`` is taken as the matrix logarithm of ``U_j^dag U_{j+1}``
  built from the stored propagator only.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpectrumWarning,
    MissingGenerators,
    NearZeroCrossing,
    NonGlobalCyclicWarning,
    NotCyclic,
    ZeroTrace,
)
from .evolution import (
    CYCLIC_TOL,
    CyclicityReport,
    PropagatorPath,
    check_cyclic,
    level_overlaps,
)
from .matcore import (
    UNWIND_MIN_MAGNITUDE,
    DensityOperator,
    dagger,
    principal_angle,
    scalar_unitary_distance,
    unwind_phase,
)

log = logging.getLogger(__name__)

ONEFORM_RESIDUE_TOL = 1e-8
BRANCH_MODES = ("anchored", "independent")


@dataclass(frozen=True, eq=False)
class TotalPhaseSeries:
    times: np.ndarray
    trace: np.ndarray
    running: np.ndarray


@dataclass(frozen=True, eq=False)
class RunningSeries:
    """Per-node diagnostics; angle columns are NaN when undefined."""

    t: np.ndarray
    trace: np.ndarray
    phi_running: np.ndarray
    phi_dyn_running: np.ndarray
    beta_cumulative: np.ndarray

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True, eq=False)
class PhaseReport:
    phi_total: float
    phi_dyn: float
    phi_geo: float
    phi_geo_oneform: float | None
    route_discrepancy: float | None
    phi_total_principal: float
    cyclicity: CyclicityReport
    running_series: RunningSeries
    phi_dyn_fd: float
    oneform_imag_residue: float | None
    total_phase_mode: str = "unwound"

    @property
    def phi_geo_principal(self) -> float:
        return principal_angle(self.phi_geo)


@dataclass(frozen=True, eq=False)
class PerLevelPhases:
    weights: np.ndarray
    level_total: np.ndarray
    level_dyn: np.ndarray
    level_geo: np.ndarray
    branch_mode: str
    weighted_geo: float
    weighted_dyn: float


def _traces(path: PropagatorPath, rho0: DensityOperator) -> np.ndarray:
    return np.einsum("ij,nji->n", rho0.matrix, path.unitaries)


def total_phase(
    path: PropagatorPath,
    rho0: DensityOperator,
    min_magnitude: float = UNWIND_MIN_MAGNITUDE,
) -> tuple[float, TotalPhaseSeries]:
    """Unwound ``arg Tr[rho0 U(tau)]`` continued from ``phi(0) = 0``."""
    c = _traces(path, rho0)
    try:
        running = unwind_phase(c, min_magnitude)
    except NearZeroCrossing as exc:
        raise NearZeroCrossing(f"Tr[rho0 U(t)] vanishes along the path: {exc}") from exc
    return float(running[-1]), TotalPhaseSeries(path.times, c, running)


def _energies(path: PropagatorPath, weights_matrix: np.ndarray) -> np.ndarray:
    if path.generators is None:
        raise MissingGenerators("path carries no generator records")
    k = path.heisenberg_generators()
    return np.real(np.einsum("ij,nji->n", weights_matrix, k))


def dynamical_phase(path: PropagatorPath, rho0: DensityOperator) -> tuple[float, np.ndarray]:
    """``-sum_j Tr[rho(t_mid) H(t_mid)] dt`` and its running sum per node."""
    inc = -_energies(path, rho0.matrix) * path.dts
    running = np.concatenate([[0.0], np.cumsum(inc)])
    return float(math.fsum(inc)), running


def dynamical_phase_difference(path: PropagatorPath, rho0: DensityOperator) -> float:
    """Finite-difference cross-check ``-i sum Tr[rho0 U_j^dag (U_j+1 - U_j)]``.

    Agrees with :func:`dynamical_phase` to O(dt); pulse steps are skipped.
    """
    u = path.unitaries
    steps = dagger(u[:-1]) @ (u[1:] - u[:-1])
    terms = -1j * np.einsum("ij,nji->n", rho0.matrix, steps)
    return float(np.real(terms[~path.pulse_mask]).sum())


def _step_generators(path: PropagatorPath) -> np.ndarray:
    # G_j Hermitian with U_j^dag U_j+1 = exp(-i G_j); eigenphases are small
    # for resolved steps, so the sine part separates the eigenspaces.
    u = path.unitaries
    w = dagger(u[:-1]) @ u[1:]
    s = (w - dagger(w)) / 2j
    _, vecs = np.linalg.eigh(s)
    diag = np.einsum("nik,nij,njk->nk", np.conj(vecs), w, vecs)
    lam = np.angle(diag)
    g = (vecs * (-lam)[:, None, :]) @ dagger(vecs)
    rebuilt = (vecs * np.exp(1j * lam)[:, None, :]) @ dagger(vecs)
    bad = np.flatnonzero(np.max(np.abs(rebuilt - w), axis=(1, 2)) > 1e-10)
    if bad.size:
        from scipy.linalg import logm

        for j in bad:
            g[j] = 1j * logm(w[j])
    return g


def _one_form_terms(path, rho0, running_phase):
    g = _step_generators(path)
    conn = np.einsum("ij,nji->n", rho0.matrix, g)
    conn[path.pulse_mask] = 0.0
    betas = np.diff(running_phase) + np.real(conn)
    return betas, float(abs(np.imag(conn).sum()))


def one_form(
    path: PropagatorPath,
    rho0: DensityOperator,
    min_magnitude: float = UNWIND_MIN_MAGNITUDE,
) -> np.ndarray:
    """Stepwise values of ``beta = i Tr[rho0 U~^dag dU~]`` along the path,
    with ``U~ = exp(-i phi(t)) U``.  Pulse steps keep only their jump in the
    running phase (their energy content is excluded, as in the dynamical
    phase)."""
    _, series = total_phase(path, rho0, min_magnitude)
    betas, residue = _one_form_terms(path, rho0, series.running)
    if residue > ONEFORM_RESIDUE_TOL:
        log.warning("one-form has imaginary residue %.3g", residue)
    return betas


def integrate_one_form(betas) -> float:
    return float(math.fsum(np.asarray(betas, dtype=float)))


def geometric_phase(
    path: PropagatorPath,
    rho0: DensityOperator,
    tol_cyclic: float = CYCLIC_TOL,
    allow_noncyclic: bool = False,
    min_magnitude: float = UNWIND_MIN_MAGNITUDE,
    endpoint_fallback: bool = False,
) -> PhaseReport:
    """Geometric phase as total minus dynamical phase.

    With ``endpoint_fallback`` a vanishing running trace no longer aborts:
    the total phase becomes the principal ``arg Tr[rho0 U(tau)]``, the
    running phase and the one-form route are left undefined.
    """
    cyc = check_cyclic(path, rho0, tol_cyclic)
    if not cyc.cyclic and not allow_noncyclic:
        raise NotCyclic(
            f"evolution is not cyclic (state residual {cyc.state_residual:.3g}, "
            f"commutator residual {cyc.commutator_residual:.3g}, tol {tol_cyclic:g})"
        )
    phi_d, dyn_running = dynamical_phase(path, rho0)
    phi_d_fd = dynamical_phase_difference(path, rho0)
    nan = np.full(len(path.times), np.nan)
    try:
        phi, series = total_phase(path, rho0, min_magnitude)
    except NearZeroCrossing:
        if not endpoint_fallback:
            raise
        c = _traces(path, rho0)
        if abs(c[-1]) <= min_magnitude:
            raise
        phi = principal_angle(float(np.angle(c[-1])))
        running = RunningSeries(path.times, c, nan, dyn_running, nan)
        return PhaseReport(
            phi, phi_d, phi - phi_d, None, None, phi, cyc, running, phi_d_fd, None, "endpoint"
        )

    betas, residue = _one_form_terms(path, rho0, series.running)
    if residue > ONEFORM_RESIDUE_TOL:
        log.warning("one-form has imaginary residue %.3g", residue)
    oneform = integrate_one_form(betas)
    phi_g = phi - phi_d
    running = RunningSeries(
        path.times, series.trace, series.running, dyn_running,
        np.concatenate([[0.0], np.cumsum(betas)]),
    )
    return PhaseReport(
        phi_total=phi,
        phi_dyn=phi_d,
        phi_geo=phi_g,
        phi_geo_oneform=oneform,
        route_discrepancy=abs(oneform - phi_g),
        phi_total_principal=principal_angle(phi),
        cyclicity=cyc,
        running_series=running,
        phi_dyn_fd=phi_d_fd,
        oneform_imag_residue=residue,
    )


def per_level_phases(
    path: PropagatorPath,
    rho0: DensityOperator,
    branch_mode: str = "anchored",
    min_magnitude: float = UNWIND_MIN_MAGNITUDE,
    phi_total: float | None = None,
) -> PerLevelPhases:
    """Weighted per-eigenlevel decomposition of the geometric phase.

    ``anchored`` gives every level the unwound total phase of the full
    trace (pass ``phi_total`` to reuse an already computed value);
    ``independent`` unwinds each level overlap ``<psi_k|U|psi_k>`` on its
    own branch.
    """
    if branch_mode not in BRANCH_MODES:
        raise ValueError(f"branch_mode must be one of {BRANCH_MODES}, got {branch_mode!r}")
    spec = rho0.spectrum
    w = rho0.weights
    if spec.degenerate:
        warnings.warn(
            "rho0 has degenerate weights; per-level phases depend on the chosen basis",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
    projs = spec.projectors()
    e = np.stack([_energies(path, p) for p in projs], axis=1)
    level_dyn = -(e * path.dts[:, None]).sum(axis=0)

    if branch_mode == "anchored":
        try:
            _, dist = scalar_unitary_distance(path.final)
        except ZeroTrace:
            dist = math.inf
        if dist > CYCLIC_TOL:
            warnings.warn(
                f"U(tau) is {dist:.3g} away from a scalar; anchored decomposition "
                "assumes a global cyclic evolution",
                NonGlobalCyclicWarning,
                stacklevel=2,
            )
        if phi_total is None:
            phi_total, _ = total_phase(path, rho0, min_magnitude)
        level_total = np.full(len(w), float(phi_total))
    else:
        ov = level_overlaps(path, rho0)
        try:
            level_total = np.array(
                [unwind_phase(ov[:, k], min_magnitude)[-1] for k in range(len(w))]
            )
        except NearZeroCrossing as exc:
            raise NearZeroCrossing(f"level overlap vanishes en route: {exc}") from exc

    level_geo = level_total - level_dyn
    return PerLevelPhases(
        weights=w,
        level_total=level_total,
        level_dyn=level_dyn,
        level_geo=level_geo,
        branch_mode=branch_mode,
        weighted_geo=float(np.dot(w, level_geo)),
        weighted_dyn=float(np.dot(w, level_dyn)),
    )
