"""Small dense complex linear algebra: density validation, Hermitian
eigenproblems, exact exponentials of Hermitian generators and continuous
phase unwinding.

All routines operate on ``numpy`` arrays of dtype ``complex128`` and are
intended for dimensions up to 32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    JumpTooLarge,
    NearZeroCrossing,
    NotHermitian,
    NotPositive,
    NotUnitTrace,
    ZeroTrace,
)

HERMITIAN_TOL = 1e-10
DEGENERACY_GAP = 1e-9
UNWIND_MIN_MAGNITUDE = 1e-8
UNWIND_MAX_STEP = math.pi / 2
MAX_DIM = 32

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite square complex matrix."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DimensionMismatch(f"dimension {a.shape[0]} exceeds {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _check_hermitian(a: np.ndarray, tol: float) -> None:
    asym = np.max(np.abs(a - dagger(a))) if a.size else 0.0
    if asym > tol:
        raise NotHermitian(f"matrix deviates from Hermitian by {asym:.3g} (tol {tol:g})")


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # Largest-magnitude component made real and nonnegative; ties go to the
    # lowest index so that roundoff cannot flip the choice.
    out = vecs.copy()
    for k in range(out.shape[1]):
        v = out[:, k]
        mags = np.abs(v)
        idx = int(np.argmax(mags >= mags.max() - 1e-10))
        out[:, k] = v * (np.conj(v[idx]) / mags[idx])
        out[idx, k] = mags[idx]
    return out


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degenerate: bool

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]

    def projectors(self) -> np.ndarray:
        """Rank-one projectors ``|psi_k><psi_k|`` stacked along axis 0."""
        v = self.eigenvectors
        return np.einsum("ik,jk->kij", v, np.conj(v))

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)

    def clusters(self, gap: float = DEGENERACY_GAP) -> list[list[int]]:
        groups: list[list[int]] = [[0]] if self.dim else []
        for k in range(1, self.dim):
            if self.eigenvalues[k - 1] - self.eigenvalues[k] < gap:
                groups[-1].append(k)
            else:
                groups.append([k])
        return groups


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray
    spectrum: SpectralDecomposition

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self.spectrum.eigenvalues


def eig_hermitian(h, tol: float = HERMITIAN_TOL) -> SpectralDecomposition:
    a = as_matrix(h)
    _check_hermitian(a, tol)
    a = 0.5 * (a + dagger(a))
    vals, vecs = np.linalg.eigh(a)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = _fix_phases(vecs[:, order])
    degenerate = bool(np.any(-np.diff(vals) < DEGENERACY_GAP))
    return SpectralDecomposition(vals, vecs, degenerate)


def validate_density(m, tol: float = HERMITIAN_TOL) -> DensityOperator:
    """Check that ``m`` is a density operator and attach its spectrum.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero and the spectrum is
    rescaled so the trace is exactly one; the stored matrix is rebuilt from
    the cleaned spectrum in that case.
    """
    a = as_matrix(m)
    _check_hermitian(a, tol)
    tr = np.trace(a)
    if abs(tr - 1.0) > tol:
        raise NotUnitTrace(f"trace is {tr.real:.12g}{tr.imag:+.3g}j")
    spec = eig_hermitian(a, tol)
    w = spec.eigenvalues
    if w.min() < -tol:
        raise NotPositive(f"eigenvalue {w.min():.3g} below -{tol:g}")
    a = 0.5 * (a + dagger(a))
    if w.min() < 0:
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        spec = SpectralDecomposition(w, spec.eigenvectors, spec.degenerate)
        a = spec.reconstruct()
    else:
        w = w / w.sum()
        spec = SpectralDecomposition(w, spec.eigenvectors, spec.degenerate)
        a = a / np.trace(a).real
    return DensityOperator(a, spec)


def bloch_density(r: float, theta: float, phi: float) -> np.ndarray:
    """Qubit density matrix ``(I + r n.sigma)/2`` for polar/azimuth angles."""
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    return 0.5 * (np.eye(2) + r * (n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z))


def exp_hermitian_generator(h, dt: float) -> np.ndarray:
    """Return ``exp(-i h dt)`` through the eigendecomposition of ``h``."""
    a = as_matrix(h)
    _check_hermitian(a, HERMITIAN_TOL)
    return exp_hermitian_batch(a[None], np.array([dt]))[0]


def exp_hermitian_batch(h: np.ndarray, dt: np.ndarray) -> np.ndarray:
    """Vectorised ``exp(-i h[j] dt[j])`` for a stack of Hermitian matrices.

    No Hermiticity check; callers validate generators once up front.
    """
    h = 0.5 * (h + dagger(h))
    vals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * vals * np.asarray(dt, dtype=float)[:, None])
    return (vecs * phases[:, None, :]) @ dagger(vecs)


def scalar_unitary_distance(u) -> tuple[float, float]:
    """Distance of ``u`` from the set of scalar unitaries.

    Returns ``(theta, dist)`` with ``theta = arg Tr u`` and
    ``dist = ||u - exp(i theta) I||_F = sqrt(2d - 2|Tr u|)``.  Raises
    :class:`ZeroTrace` (carrying ``dist``) when the trace vanishes.
    """
    a = as_matrix(u)
    d = a.shape[0]
    tr = np.trace(a)
    if abs(tr) < 1e-12:
        raise ZeroTrace(math.sqrt(2 * d))
    theta = principal_angle(float(np.angle(tr)))
    # direct norm; the closed form loses half the digits near dist = 0
    dist = float(np.linalg.norm(a - np.exp(1j * theta) * np.eye(d)))
    return theta, dist


def principal_angle(x):
    """Map angles into ``(-pi, pi]``."""
    y = math.pi - np.mod(math.pi - np.asarray(x, dtype=float), 2 * math.pi)
    return float(y) if np.ndim(y) == 0 else y


def unwind_phase(
    samples,
    min_magnitude: float = UNWIND_MIN_MAGNITUDE,
    max_step: float = UNWIND_MAX_STEP,
) -> np.ndarray:
    """Continuous argument of a complex trajectory.

    The first angle is the principal argument of ``samples[0]``; every later
    one is the branch of ``arg(samples[j])`` nearest its predecessor.
    """
    z = np.asarray(samples, dtype=complex).ravel()
    if z.size == 0:
        return np.zeros(0)
    mags = np.abs(z)
    bad = np.flatnonzero(mags <= min_magnitude)
    if bad.size:
        j = int(bad[0])
        raise NearZeroCrossing(
            f"|sample[{j}]| = {mags[j]:.3g} <= {min_magnitude:g}; argument undefined"
        )
    theta = np.unwrap(principal_angle(np.angle(z)))
    if z.size > 1:
        steps = np.abs(np.diff(theta))
        j = int(np.argmax(steps))
        if steps[j] >= max_step:
            raise JumpTooLarge(
                f"branch step {steps[j]:.3g} rad between samples {j} and {j + 1} "
                f"exceeds {max_step:.3g}; refine the grid"
            )
    return theta
