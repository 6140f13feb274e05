import math

import numpy as np
import pytest

from geophase.evolution import ConstantSegment, HamiltonianSpec, grid_for_steps, propagate
from geophase.matcore import SIGMA_Z, bloch_density, validate_density


def constant_path(h, tau, steps=4096, pulses=()):
    h = np.asarray(h, dtype=complex)
    spec = HamiltonianSpec(h.shape[0], (ConstantSegment(tau, h),), tuple(pulses))
    return propagate(spec, grid_for_steps(spec, steps))


@pytest.fixture
def sigma_z_path():
    return constant_path(0.5 * SIGMA_Z, 2 * math.pi)


@pytest.fixture
def mixed_rho():
    return validate_density(np.diag([0.75, 0.25]))


def qubit(r, theta, phi=0.0):
    return validate_density(bloch_density(r, theta, phi))
