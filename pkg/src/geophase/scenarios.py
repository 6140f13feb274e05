"""Shipped qubit scenarios, emitted as ordinary run configurations."""

from __future__ import annotations

import math

import numpy as np

from .config import RunConfig, default_steps, dump_matrix, parse_document
from .errors import DomainError
from .matcore import SIGMA_X, SIGMA_Z


def _base(r: float, theta: float, phi: float = 0.0) -> dict:
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"purity radius r = {r} outside [0, 1]")
    return {
        "system": {"dim": 2, "bloch": {"r": float(r), "theta": float(theta), "phi": float(phi)}},
        "grid": {"steps": default_steps()},
    }


def precession_document(r: float, theta: float, omega: float, turns: int) -> dict:
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if isinstance(turns, bool) or int(turns) != turns or turns < 1:
        raise DomainError(f"turns must be a positive integer, got {turns}")
    doc = _base(r, theta)
    tau = 2 * math.pi * int(turns) / omega
    doc["hamiltonian"] = {
        "segments": [{"kind": "constant", "duration": tau, "H": dump_matrix(0.5 * omega * SIGMA_Z)}],
        "pulses": [],
    }
    return doc


def scenario_precession(r: float, theta: float, omega: float = 1.0, turns: int = 1) -> RunConfig:
    """Qubit precessing about z; one full turn takes ``2 pi / omega``."""
    return parse_document(precession_document(r, theta, omega, turns))


def scenario_echo(
    omega: float,
    tau: float,
    r: float = 0.5,
    theta: float = 0.0,
    pulses: bool = True,
) -> RunConfig:
    """Precession split at ``tau/2`` with pi-pulses about x at ``tau/2`` and
    ``tau``.

    The running trace vanishes between the pulses, so the configuration
    enables the endpoint phase fallback.  ``pulses=False`` gives the plain
    precession over the same two segments.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    doc = _base(r, theta)
    h = dump_matrix(0.5 * omega * SIGMA_Z)
    flip = dump_matrix(-1j * SIGMA_X)  # exp(-i (pi/2) sigma_x)
    doc["hamiltonian"] = {
        "segments": [
            {"kind": "constant", "duration": tau / 2, "H": h},
            {"kind": "constant", "duration": tau / 2, "H": h},
        ],
        "pulses": [{"time": tau / 2, "unitary": flip}, {"time": tau, "unitary": flip}] if pulses else [],
    }
    doc["mode"] = {"endpoint_phase_fallback": bool(pulses)}
    return parse_document(doc)


def scenario_gauge_demo(
    windings=(1, 0),
    profile: str = "linear",
    r: float = 0.5,
    theta: float = 0.0,
) -> RunConfig:
    """Mixed precession with a diagonal winding transform attached."""
    doc = precession_document(r, theta, 1.0, 1)
    doc["gauge"] = {"windings": [int(n) for n in np.asarray(windings)], "profile": profile}
    return parse_document(doc)
