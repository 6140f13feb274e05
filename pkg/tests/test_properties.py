import math

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from geophase.gaugelab import build_diagonal_gauge, gauge_shift_report, parallel_transport_lift
from geophase.matcore import SIGMA_Z, validate_density
from geophase.phasecalc import geometric_phase

from conftest import constant_path

TWO_PI = 2 * math.pi
PATH = constant_path(0.5 * SIGMA_Z, TWO_PI, steps=512)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.55, 0.95),
    st.lists(st.integers(-3, 3), min_size=2, max_size=2),
    st.sampled_from(["linear", "smooth"]),
)
def test_diagonal_shift_law(w0, windings, profile):
    rho = validate_density(np.diag([w0, 1 - w0]))
    rep = gauge_shift_report(PATH, rho, build_diagonal_gauge(rho.spectrum, PATH, windings, profile))
    assert rep.shift_residual_mod_2pi < 1e-7
    assert abs(rep.endpoint_shift - rep.predicted_shift) < 1e-7


@settings(max_examples=40, deadline=None)
@given(st.floats(0.55, 0.95), st.integers(-3, 3))
def test_uniform_windings_never_move_the_phase_mod_2pi(w0, n):
    rho = validate_density(np.diag([w0, 1 - w0]))
    rep = gauge_shift_report(PATH, rho, build_diagonal_gauge(rho.spectrum, PATH, (n, n)))
    assert abs(math.remainder(rep.observed_shift, TWO_PI)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, math.pi - 0.05), st.floats(0, TWO_PI))
def test_lift_kills_dynamical_phase_and_keeps_cyclicity(r, theta, phi):
    n = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    rho = validate_density(0.5 * (np.eye(2) + r * (n[0] * np.array([[0, 1], [1, 0]])
                                                 + n[1] * np.array([[0, -1j], [1j, 0]])
                                                 + n[2] * SIGMA_Z)))
    base = geometric_phase(PATH, rho)
    assume(np.min(np.abs(base.running_series.trace)) > 1e-3)
    lifted = geometric_phase(parallel_transport_lift(PATH, rho), rho)
    assert abs(lifted.phi_dyn) < 1e-9
    assert abs(lifted.phi_geo - lifted.phi_total) < 1e-9
    assert lifted.cyclicity.cyclic
