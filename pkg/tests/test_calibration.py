import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiraltunnel.calibration import (
    fit_decay,
    fit_j_parameters,
    fit_line,
    third_branch_frequencies,
    with_j,
)
from chiraltunnel.coupling import ThirdModeParams, omega_c
from chiraltunnel.errors import ConfigError, FitError
from chiraltunnel.modes import build_matrix, eigenfrequencies_general, third_branch
from chiraltunnel.presets import get_preset

from conftest import make_system

P_LINE = (-0.516, 10.02)


def test_fit_line_collinear():
    fit = fit_line([(1, 1), (2, 2), (3, 3)])
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.residual_rms == pytest.approx(0.0, abs=1e-12)
    assert fit.n_points == 3


def test_fit_line_recovers_third_mode_line():
    xs = get_preset("P").distances
    fit = fit_line([(x, P_LINE[0] * x + P_LINE[1]) for x in xs])
    assert abs(fit.slope - P_LINE[0]) < 1e-9
    assert abs(fit.intercept - P_LINE[1]) < 1e-9
    assert fit.residual_rms < 1e-9


def test_fit_line_constant():
    fit = fit_line([(0.0, 4.5), (1.0, 4.5), (7.0, 4.5)])
    assert fit.slope == 0.0
    assert fit.intercept == 4.5


def test_fit_line_errors():
    with pytest.raises(FitError):
        fit_line([(1.0, 2.0)])
    with pytest.raises(FitError):
        fit_line([(1.0, 2.0), (1.0, 3.0)])


@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=20, unique=True),
    st.floats(-5, 5), st.floats(-20, 20), st.floats(0.1, 100),
)
def test_fit_line_exact_and_scale_equivariant(xs, m, b, c):
    if max(xs) - min(xs) < 1e-3:
        return
    pts = [(x, m * x + b) for x in xs]
    fit = fit_line(pts)
    assert fit.slope == pytest.approx(m, abs=1e-9)
    assert fit.intercept == pytest.approx(b, abs=1e-9)
    scaled = fit_line([(x, c * y) for x, y in pts])
    assert scaled.slope == pytest.approx(c * fit.slope, rel=1e-9, abs=1e-9)
    assert scaled.intercept == pytest.approx(c * fit.intercept, rel=1e-9, abs=1e-9)


def split(amp, d0, d):
    return 2 * amp * math.exp(-d / d0)


def test_fit_decay_recovers_parameters():
    data = [(d, split(0.5, 2.0, d)) for d in (0, 1, 2, 4)]
    fit = fit_decay(data)
    assert fit.d0_hat == pytest.approx(2.0, rel=1e-9)
    assert fit.g0_theta_hat == pytest.approx(0.5, rel=1e-9)
    assert fit.n_points == 4


def test_fit_decay_from_eigenvalues():
    # splittings measured on the closed-form eigenpair of preset R
    from chiraltunnel.modes import eigenfrequencies_two_mode

    data = []
    for d in get_preset("R").distances:
        hi, lo = eigenfrequencies_two_mode(make_system(delta_phi=math.pi, d=d))
        data.append((d, hi.re - lo.re))
    fit = fit_decay(data)
    assert fit.d0_hat == pytest.approx(2.0, rel=1e-9)
    assert fit.g0_theta_hat == pytest.approx(0.5, rel=1e-9)


def test_fit_decay_two_points():
    fit = fit_decay([(1.0, 0.8), (3.0, 0.2)])
    assert fit.d0_hat == pytest.approx(2.0 / math.log(4.0), rel=1e-12)
    assert fit.residual_rms < 1e-12


def test_fit_decay_errors():
    with pytest.raises(FitError):
        fit_decay([(0.0, 0.1), (1.0, 0.2), (2.0, 0.4)])
    with pytest.raises(FitError):
        fit_decay([(0.0, 0.1), (1.0, 0.0)])
    with pytest.raises(FitError):
        fit_decay([(0.0, 0.1)])


@settings(max_examples=200)
@given(st.floats(1e-3, 10.0), st.floats(0.1, 10.0))
def test_fit_decay_roundtrip_property(amp, d0):
    fit = fit_decay([(d, split(amp, d0, d)) for d in (0.0, 0.7, 1.9, 3.3, 5.0)])
    assert fit.d0_hat == pytest.approx(d0, rel=1e-9)
    assert fit.g0_theta_hat == pytest.approx(amp, rel=1e-9)


def base_three_mode(j1=0.0, j2=0.0):
    p = get_preset("R")
    return make_system(delta_phi=math.pi, d=p.distances[0],
                       third=ThirdModeParams(j1, j2, p.omega_c_slope, p.omega_c_intercept, 0.1))


def synthesize(j1, j2, configs=("R", "Q")):
    """Third-branch peaks from the full matrix eigen-decomposition."""
    out = {}
    for name in configs:
        p = get_preset(name)
        pts = []
        for d in p.distances:
            s = base_three_mode(j1, j2)
            s = make_system(delta_phi=p.delta_phi, d=d, third=s.coupling.third)
            freqs = eigenfrequencies_general(build_matrix(s))
            pts.append((d, third_branch(freqs, omega_c(s.coupling.third, d)).re))
        out[p.delta_phi] = pts
    return out


def test_fit_j_recovers_r_pair():
    fit = fit_j_parameters(synthesize(0.045, 0.020), base_three_mode(0.3, 0.3))
    assert abs(fit.j1_hat - 0.045) <= 1e-4
    assert abs(fit.j2_hat - 0.020) <= 1e-4
    assert fit.residual_rms < 1e-6
    j1, j2 = fit
    assert (j1, j2) == (fit.j1_hat, fit.j2_hat)


def test_fit_j_decoupled():
    data = synthesize(0.0, 0.0)
    for phi, pts in data.items():
        for d, f in pts:
            assert f == pytest.approx(omega_c(base_three_mode().coupling.third, d), abs=1e-12)
    fit = fit_j_parameters(data, base_three_mode())
    assert (fit.j1_hat, fit.j2_hat) == (0.0, 0.0)


def test_fit_j_history_and_order():
    data = synthesize(0.058, 0.033)
    fit = fit_j_parameters(data, base_three_mode())
    assert all(b <= a for a, b in zip(fit.history, fit.history[1:]))
    reversed_data = dict(reversed(list(data.items())))
    again = fit_j_parameters(reversed_data, base_three_mode())
    assert (again.j1_hat, again.j2_hat, again.residual_rms) == (fit.j1_hat, fit.j2_hat, fit.residual_rms)


def test_fit_j_model_matches_synthesis():
    base = with_j(base_three_mode(), 0.065, 0.045)
    p = get_preset("S")
    model = third_branch_frequencies(base, p.delta_phi, p.distances)
    ref = synthesize(0.065, 0.045, configs=("S",))[p.delta_phi]
    np.testing.assert_allclose(model, [f for _, f in ref], atol=1e-12)


def test_fit_j_coverage_errors():
    data = synthesize(0.045, 0.020, configs=("P",))
    with pytest.raises(FitError, match="sin\\^2 regime unconstrained"):
        fit_j_parameters(data, base_three_mode())
    data = synthesize(0.045, 0.020, configs=("P", "R"))
    with pytest.raises(FitError, match="sin\\^2"):
        fit_j_parameters(data, base_three_mode())
    data = synthesize(0.045, 0.020, configs=("Q", "S"))
    with pytest.raises(FitError, match="cos\\^2"):
        fit_j_parameters(data, base_three_mode())


def test_fit_j_needs_third_mode():
    with pytest.raises(ConfigError):
        fit_j_parameters(synthesize(0.045, 0.020), make_system())


def test_reports_are_key_value():
    text = fit_line([(0, 1), (1, 2)]).report()
    keys = [line.split("=")[0] for line in text.splitlines()]
    assert keys == ["slope_ghz_per_mm", "intercept_ghz", "residual_rms", "n_points"]
    text = fit_decay([(0, 1), (1, 0.5)]).report()
    assert text.startswith("d0_mm=")


@pytest.mark.parametrize("name", ["P", "Q", "R", "S"])
def test_fit_j_recovers_each_preset_pair(name):
    p = get_preset(name)
    fit = fit_j_parameters(synthesize(p.j1, p.j2, configs=("P", "Q", "R", "S")), base_three_mode())
    assert abs(fit.j1_hat - p.j1) <= 1e-4
    assert abs(fit.j2_hat - p.j2) <= 1e-4
