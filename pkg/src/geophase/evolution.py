"""Piecewise Hamiltonians, time grids and the time-ordered propagator.

The propagator is an ordered product of midpoint exponentials,
``U[j+1] = exp(-i H(t_mid) dt) U[j]``, which is exact for constant segments
and second order for sampled ones.  Pulses are zero-duration unitaries
applied at grid nodes.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySpec,
    MissingSample,
    NearZeroCrossing,
    NotHermitian,
    NotCyclic,
    NonUnitaryPulse,
    OutOfRange,
    ZeroTrace,
)
from .matcore import (
    HERMITIAN_TOL,
    UNWIND_MIN_MAGNITUDE,
    DensityOperator,
    _check_hermitian,
    as_matrix,
    dagger,
    exp_hermitian_batch,
    scalar_unitary_distance,
    unwind_phase,
)

MIN_SEGMENT_STEPS = 8
DEFAULT_STEPS = 4096
CYCLIC_TOL = 1e-8
PULSE_UNITARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ConstantSegment:
    duration: float
    H: np.ndarray


@dataclass(frozen=True, eq=False)
class SampledSegment:
    """Time-dependent segment.

    ``H_of_t`` is either a callable of absolute time or a mapping from
    absolute midpoint times to matrices; lookups in a mapping tolerate
    ``1e-9`` relative mismatch.
    """

    duration: float
    H_of_t: Union[Callable[[float], np.ndarray], Mapping[float, np.ndarray]]


Segment = Union[ConstantSegment, SampledSegment]


@dataclass(frozen=True, eq=False)
class Pulse:
    time: float
    unitary: np.ndarray


def _check_pulse(p: Pulse, dim: int) -> Pulse:
    u = as_matrix(p.unitary)
    if u.shape[0] != dim:
        raise DimensionMismatch(f"pulse at t={p.time} has dimension {u.shape[0]}, expected {dim}")
    err = np.max(np.abs(dagger(u) @ u - np.eye(dim)))
    if err > PULSE_UNITARITY_TOL:
        raise NonUnitaryPulse(f"pulse at t={p.time} deviates from unitarity by {err:.3g}")
    return Pulse(float(p.time), u)


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    dim: int
    segments: tuple
    pulses: tuple = ()

    def __post_init__(self):
        segs = []
        for s in self.segments:
            if not s.duration > 0 or not math.isfinite(s.duration):
                raise OutOfRange(f"segment duration must be positive, got {s.duration}")
            if isinstance(s, ConstantSegment):
                h = as_matrix(s.H)
                if h.shape[0] != self.dim:
                    raise DimensionMismatch(
                        f"segment Hamiltonian has dimension {h.shape[0]}, expected {self.dim}"
                    )
                _check_hermitian(h, HERMITIAN_TOL)
                s = ConstantSegment(float(s.duration), 0.5 * (h + dagger(h)))
            segs.append(s)
        object.__setattr__(self, "segments", tuple(segs))
        tau = self.tau
        pulses = []
        for p in self.pulses:
            if not (-1e-12 * max(tau, 1.0) <= p.time <= tau * (1 + 1e-12)):
                raise OutOfRange(f"pulse time {p.time} outside [0, {tau}]")
            pulses.append(_check_pulse(p, self.dim))
        object.__setattr__(self, "pulses", tuple(pulses))

    @property
    def tau(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])


def insert_pulse(spec: HamiltonianSpec, time: float, pulse) -> HamiltonianSpec:
    """Return a copy of ``spec`` with an extra pulse at ``time``."""
    tau = spec.tau
    if not (0.0 <= time <= tau):
        raise OutOfRange(f"pulse time {time} outside [0, {tau}]")
    return replace(spec, pulses=spec.pulses + (Pulse(float(time), pulse),))


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing nodes ``0 = t_0 < ... < t_N = tau``.

    ``pulse_counts[i]`` is the number of pulses applied at node ``i`` and
    ``segment_of_step[j]`` the segment owning the interval ``[t_j, t_j+1]``.
    """

    nodes: np.ndarray
    pulse_counts: np.ndarray
    segment_of_step: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.nodes) - 1

    @property
    def tau(self) -> float:
        return float(self.nodes[-1])

    def path_times(self) -> np.ndarray:
        """Node times with a repeat after every pulse (zero-duration steps)."""
        return np.repeat(self.nodes, 1 + self.pulse_counts)


def _snap(t: float, anchors: np.ndarray, scale: float) -> float:
    j = int(np.argmin(np.abs(anchors - t)))
    return float(anchors[j]) if abs(anchors[j] - t) <= 1e-12 * scale else float(t)


def build_grid(spec: HamiltonianSpec, steps_per_unit_time: float) -> TimeGrid:
    """Subdivide each segment uniformly between its breakpoints.

    Every segment gets at least ``ceil(duration * steps_per_unit_time)``
    steps (and at least 8); pulse times split segments into pieces so that
    each pulse falls on a node.
    """
    if not spec.segments:
        raise EmptySpec("Hamiltonian has no segments")
    if not steps_per_unit_time > 0:
        raise OutOfRange("steps_per_unit_time must be positive")
    bounds = spec.boundaries()
    tau = float(bounds[-1])
    ptimes = [_snap(p.time, bounds, tau) for p in spec.pulses]

    nodes = [0.0]
    seg_of_step = []
    for k, seg in enumerate(spec.segments):
        a, b = float(bounds[k]), float(bounds[k + 1])
        cuts = sorted({t for t in ptimes if a < t < b})
        pieces = list(zip([a] + cuts, cuts + [b]))
        rate = max(steps_per_unit_time, MIN_SEGMENT_STEPS / seg.duration)
        for lo, hi in pieces:
            n = max(1, math.ceil((hi - lo) * rate - 1e-9))
            nodes.extend(np.linspace(lo, hi, n + 1)[1:].tolist())
            seg_of_step.extend([k] * n)
        nodes[-1] = b

    nodes = np.array(nodes)
    counts = np.zeros(len(nodes), dtype=int)
    for t in ptimes:
        counts[int(np.argmin(np.abs(nodes - t)))] += 1
    return TimeGrid(nodes, counts, np.array(seg_of_step, dtype=int))


def grid_for_steps(spec: HamiltonianSpec, steps: int = DEFAULT_STEPS) -> TimeGrid:
    """Grid with (about) ``steps`` intervals over the whole evolution."""
    if not spec.segments:
        raise EmptySpec("Hamiltonian has no segments")
    return build_grid(spec, steps / spec.tau)


@dataclass(frozen=True, eq=False)
class PropagatorPath:
    """Discretised propagator.

    Arrays are indexed by path node (``times``, ``unitaries``; length M+1)
    or by step (``generators``, ``midpoint_unitaries``, ``pulse_mask``;
    length M).  Pulse steps have zero duration and a zero generator.
    """

    grid: TimeGrid
    times: np.ndarray
    unitaries: np.ndarray
    generators: np.ndarray
    midpoint_unitaries: np.ndarray
    pulse_mask: np.ndarray
    source: HamiltonianSpec | None = None

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    @property
    def dts(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.unitaries[-1]

    def heisenberg_generators(self) -> np.ndarray:
        """``U_mid^dag H_mid U_mid`` per step, so ``U^dag dU/dt = -i K``."""
        um = self.midpoint_unitaries
        return dagger(um) @ self.generators @ um

    def states(self, rho0: np.ndarray) -> np.ndarray:
        u = self.unitaries
        return u @ rho0 @ dagger(u)


def _sampled_generators(seg: SampledSegment, mids: np.ndarray, dim: int) -> np.ndarray:
    src = seg.H_of_t
    if callable(src):
        hs = np.array([np.asarray(src(float(t)), dtype=complex) for t in mids])
    else:
        keys = np.array(sorted(src), dtype=float)
        if keys.size == 0:
            raise MissingSample("sampled segment has an empty table")
        table = [src[k] for k in sorted(src)]
        pos = np.searchsorted(keys, mids)
        lo = np.clip(pos - 1, 0, len(keys) - 1)
        hi = np.clip(pos, 0, len(keys) - 1)
        pick = np.where(np.abs(keys[lo] - mids) <= np.abs(keys[hi] - mids), lo, hi)
        miss = np.abs(keys[pick] - mids) > 1e-9 * np.maximum(1.0, np.abs(mids))
        if np.any(miss):
            t = mids[np.flatnonzero(miss)[0]]
            raise MissingSample(f"no sample for midpoint t={t:.15g}")
        hs = np.array([np.asarray(table[i], dtype=complex) for i in pick])
    if hs.shape[1:] != (dim, dim):
        raise DimensionMismatch(f"sampled Hamiltonian has shape {hs.shape[1:]}, expected {(dim, dim)}")
    asym = np.max(np.abs(hs - dagger(hs)))
    if asym > HERMITIAN_TOL:
        raise NotHermitian(f"sampled Hamiltonian deviates from Hermitian by {asym:.3g}")
    return 0.5 * (hs + dagger(hs))


def propagate(spec: HamiltonianSpec, grid: TimeGrid) -> PropagatorPath:
    d = spec.dim
    nodes = grid.nodes
    dts = np.diff(nodes)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    gens = np.zeros((len(dts), d, d), dtype=complex)
    for k, seg in enumerate(spec.segments):
        idx = np.flatnonzero(grid.segment_of_step == k)
        if idx.size == 0:
            continue
        if isinstance(seg, ConstantSegment):
            gens[idx] = seg.H
        else:
            gens[idx] = _sampled_generators(seg, mids[idx], d)
    full = exp_hermitian_batch(gens, dts)
    half = exp_hermitian_batch(gens, 0.5 * dts)

    pulses_at: dict[int, list[np.ndarray]] = {}
    for p in spec.pulses:
        i = int(np.argmin(np.abs(nodes - p.time)))
        pulses_at.setdefault(i, []).append(p.unitary)

    m = grid.steps + int(grid.pulse_counts.sum())
    us = np.empty((m + 1, d, d), dtype=complex)
    hs = np.zeros((m, d, d), dtype=complex)
    ums = np.empty((m, d, d), dtype=complex)
    mask = np.zeros(m, dtype=bool)
    u = np.eye(d, dtype=complex)
    us[0] = u
    s = 0
    for i in range(grid.steps + 1):
        for p in pulses_at.get(i, ()):
            ums[s] = u
            mask[s] = True
            u = p @ u
            s += 1
            us[s] = u
        if i == grid.steps:
            break
        ums[s] = half[i] @ u
        hs[s] = gens[i]
        u = full[i] @ u
        s += 1
        us[s] = u
    return PropagatorPath(grid, grid.path_times(), us, hs, ums, mask, spec)


@dataclass(frozen=True)
class CyclicityReport:
    state_residual: float
    commutator_residual: float
    cyclic: bool
    tol: float = CYCLIC_TOL


@dataclass(frozen=True)
class GlobalCyclicityReport:
    endpoint_distance: float
    endpoint_phase: float | None
    endpoint_global: bool
    unwound_level_phases: tuple
    unwound_global: bool


def _rho(rho0) -> np.ndarray:
    return rho0.matrix if isinstance(rho0, DensityOperator) else np.asarray(rho0, dtype=complex)


def check_cyclic(path: PropagatorPath, rho0: DensityOperator, tol: float = CYCLIC_TOL) -> CyclicityReport:
    r = _rho(rho0)
    if r.shape != (path.dim, path.dim):
        raise DimensionMismatch(f"state dimension {r.shape[0]} does not match path dimension {path.dim}")
    u = path.final
    state = float(np.linalg.norm(u @ r @ dagger(u) - r))
    comm = float(np.linalg.norm(u @ r - r @ u))
    return CyclicityReport(state, comm, state <= tol and comm <= tol, tol)


def level_overlaps(path: PropagatorPath, rho0: DensityOperator) -> np.ndarray:
    """``<psi_k|U_j|psi_k>`` with shape (nodes, levels)."""
    v = rho0.spectrum.eigenvectors
    return np.einsum("ik,jil,lk->jk", np.conj(v), path.unitaries, v)


def check_global_cyclic(
    path: PropagatorPath,
    rho0: DensityOperator,
    tol: float = CYCLIC_TOL,
    min_magnitude: float = UNWIND_MIN_MAGNITUDE,
) -> GlobalCyclicityReport:
    cyc = check_cyclic(path, rho0, tol)
    if not cyc.cyclic:
        raise NotCyclic(
            f"evolution is not cyclic (state residual {cyc.state_residual:.3g}, "
            f"commutator residual {cyc.commutator_residual:.3g})"
        )
    try:
        theta, dist = scalar_unitary_distance(path.final)
    except ZeroTrace as exc:
        theta, dist = None, exc.dist
    overlaps = level_overlaps(path, rho0)
    try:
        final = tuple(float(unwind_phase(overlaps[:, k], min_magnitude)[-1]) for k in range(path.dim))
    except NearZeroCrossing as exc:
        raise NearZeroCrossing(f"level overlap vanishes en route: {exc}") from exc
    spread = max(final) - min(final)
    return GlobalCyclicityReport(dist, theta, dist <= tol, final, spread <= tol)
