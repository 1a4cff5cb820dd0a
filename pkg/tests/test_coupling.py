import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chiraltunnel.coupling import (
    ChiralGeometry,
    CouplingParams,
    ThirdModeParams,
    delta_ab,
    delta_ac,
    delta_bc,
    omega_c,
    reduce_angle,
    theta,
)
from chiraltunnel.errors import ConfigError

angles = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


def coupling(phi, d, d0=1.0, g0=1.0):
    return CouplingParams(ChiralGeometry(phi, d, d0), g0)


def naive_theta(x):
    # literal formula on the reduced angle, no special-casing
    x = x % (2 * math.pi)
    h = x / 2
    return x / (2 * math.pi) * math.sin(h) * (math.sin(h) + math.cos(h))


@pytest.mark.parametrize(
    "phi, expected",
    [
        (0.0, 0.0),
        (math.pi, 0.5),
        (math.pi / 2, 0.25),
        (3 * math.pi / 2, 0.0),
        # mpmath, 30 digits
        (5 * math.pi / 3, -0.15251058491018276948),
    ],
)
def test_theta_landmarks(phi, expected):
    assert theta(phi) == pytest.approx(expected, abs=1e-15)


def test_theta_exact_zeros_and_half():
    assert theta(0.0) == 0.0
    assert theta(3 * math.pi / 2) == 0.0
    assert theta(math.radians(270)) == 0.0
    assert theta(math.pi) == 0.5


def test_theta_matches_literal_formula():
    for x in np.linspace(0, 2 * math.pi, 1001)[:-1]:
        assert theta(x) == pytest.approx(naive_theta(x), abs=1e-14)


@given(angles, st.integers(min_value=-5, max_value=5))
def test_theta_periodic(x, k):
    assert theta(x + 2 * math.pi * k) == pytest.approx(theta(x), abs=1e-9)


def test_theta_negative_only_in_last_quadrant():
    xs = np.linspace(0, 2 * math.pi, 20001)
    inner_neg = [x for x in xs if 3 * math.pi / 2 < x < 2 * math.pi and x != xs[-1]]
    assert all(theta(x) < 0 for x in inner_neg[1:-1])
    assert all(theta(x) > 0 for x in xs if 0 < x < 3 * math.pi / 2 - 1e-9)


@pytest.mark.parametrize("x", [-1e-20, -0.0, 2 * math.pi, 4 * math.pi, -2 * math.pi])
def test_reduce_angle_range(x):
    r = reduce_angle(x)
    assert 0.0 <= r < 2 * math.pi


def test_delta_ab_examples():
    assert delta_ab(coupling(math.pi, 0.0)) == pytest.approx(0.5, abs=1e-15)
    assert delta_ab(coupling(math.pi, 1.0)) == pytest.approx(0.183939720585721160797, abs=1e-15)
    for d in (0.0, 0.5, 7.0):
        assert delta_ab(coupling(3 * math.pi / 2, d)) == 0.0
    assert delta_ab(coupling(5 * math.pi / 3, 0.0)) == pytest.approx(-0.152510584910182769, abs=1e-12)


def test_delta_ab_scales_with_g0():
    assert delta_ab(coupling(math.pi, 0.3, g0=2.5)) == pytest.approx(2.5 * delta_ab(coupling(math.pi, 0.3)))


@given(st.floats(0.01, 2 * math.pi - 0.01), st.floats(0, 20), st.floats(0.01, 5), st.floats(0.1, 5))
def test_delta_ab_magnitude_decreases_with_distance(phi, d, step, d0):
    if abs(phi - 3 * math.pi / 2) < 1e-6:
        return
    near = abs(delta_ab(coupling(phi, d, d0)))
    far = abs(delta_ab(coupling(phi, d + step, d0)))
    assert far < near


def test_delta_ab_vanishes_far_away():
    assert abs(delta_ab(coupling(math.pi, 500.0))) < 1e-100


def third(j1=0.045, j2=0.02, slope=-0.516, intercept=10.02):
    return ThirdModeParams(j1, j2, slope, intercept, 0.1)


def test_delta_ac_bc_examples():
    assert delta_ac(third(j1=0.045), math.pi) == pytest.approx(0.045, abs=1e-15)
    assert delta_ac(third(j1=0.3), math.pi / 2) == 0.0
    assert delta_ac(third(j1=0.055), 0.0) == 0.055
    assert delta_bc(third(j2=0.3), 0.0) == 0.0
    assert delta_bc(third(j2=0.033), math.pi / 2) == pytest.approx(0.033, abs=1e-15)
    assert delta_bc(third(j2=0.045), 3 * math.pi / 2) == pytest.approx(0.045, abs=1e-15)


@given(st.floats(-10, 10), st.floats(0, 0.2))
def test_equal_j_gives_constant_sum(phi, j):
    tp = third(j1=j, j2=j)
    assert delta_ac(tp, phi) + delta_bc(tp, phi) == pytest.approx(j, abs=1e-15)


def test_omega_c_lines():
    assert omega_c(third(), 0.0) == 10.02
    assert omega_c(third(slope=-0.506, intercept=10.95), 0.0) == 10.95
    assert omega_c(third(), 2.0) == pytest.approx(8.988, abs=1e-12)


@given(st.floats(0, 10), st.floats(0, 10))
def test_omega_c_affine(d1, d2):
    tp = third()
    assert omega_c(tp, d1) + omega_c(tp, d2) == pytest.approx(2 * omega_c(tp, (d1 + d2) / 2), abs=1e-12)


def test_omega_c_rejects_nonpositive():
    with pytest.raises(ConfigError):
        omega_c(third(), 20.0)
    with pytest.raises(ConfigError):
        omega_c(third(), -1.0)


@pytest.mark.parametrize(
    "build",
    [
        lambda: ChiralGeometry(0.0, -1.0, 1.0),
        lambda: ChiralGeometry(0.0, 1.0, 0.0),
        lambda: ThirdModeParams(-0.1, 0.0, 0.0, 1.0),
        lambda: ThirdModeParams(0.0, 0.0, 0.0, 1.0, gamma=-1.0),
        lambda: CouplingParams(ChiralGeometry(0.0, 1.0, 1.0), g0=0.0),
    ],
)
def test_invariants_rejected(build):
    with pytest.raises(ConfigError):
        build()


def test_geometry_stores_reduced_angle():
    g = ChiralGeometry(-math.pi / 2, 0.0, 1.0)
    assert g.delta_phi == pytest.approx(3 * math.pi / 2)
