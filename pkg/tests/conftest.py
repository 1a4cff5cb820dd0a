import math

import numpy as np
import pytest

from chiraltunnel.coupling import ChiralGeometry, CouplingParams, ThirdModeParams
from chiraltunnel.modes import ModeSystem, ResonatorMode, build_matrix
from chiraltunnel.presets import get_preset


def make_system(delta_phi=math.pi, d=1.0, d0=2.0, g0=1.0, omega_r=9.0, alpha=0.01,
                beta=0.01, beta_a=0.05, beta_b=0.05, third=None, beta_c=0.025):
    coupling = CouplingParams(ChiralGeometry(delta_phi, d, d0), g0, third)
    mode_c = ResonatorMode(omega_r, 0.1, beta_c) if third is not None else None
    system = ModeSystem(
        ResonatorMode(omega_r, alpha, beta_a),
        ResonatorMode(omega_r, beta, beta_b),
        coupling,
        mode_c,
    )
    return system.at_distance(d)


def preset_system(name, d=None, third=False, **kw):
    p = get_preset(name)
    tp = ThirdModeParams(p.j1, p.j2, p.omega_c_slope, p.omega_c_intercept, 0.1) if third else None
    return make_system(delta_phi=p.delta_phi, d=p.distances[0] if d is None else d, third=tp, **kw)


def reference_amplitudes(system, drive, omega, p_in=1.0):
    """Gaussian elimination (LAPACK) on the equations written out term by term."""
    h = build_matrix(system)
    beta = np.array([m.line_coupling for m in system.modes])
    n = len(beta)
    m = np.zeros((n, n), dtype=complex)
    for x in range(n):
        m[x, x] = 1j * (omega - h[x, x]) - beta[x]
        for y in range(n):
            if y != x:
                m[x, y] = -(math.sqrt(beta[x] * beta[y]) + 1j * h[x, y])
    phases = np.array([drive.theta_a, drive.theta_b, drive.theta_c][:n])
    rhs = 1j * np.sqrt(beta) * np.exp(1j * phases) * p_in
    return np.linalg.solve(m, rhs)


def random_system(rng, third):
    tp = ThirdModeParams(*rng.uniform(0, 0.2, 2), -0.516, 10.02, rng.uniform(0.001, 0.3)) if third else None
    return make_system(
        delta_phi=rng.uniform(0, 2 * math.pi), d=rng.uniform(0, 10), d0=rng.uniform(0.2, 5),
        g0=rng.uniform(0.1, 3), omega_r=rng.uniform(5, 11), alpha=rng.uniform(0.001, 0.2),
        beta=rng.uniform(0.001, 0.2), beta_a=rng.uniform(0, 0.2), beta_b=rng.uniform(0, 0.2),
        third=tp, beta_c=rng.uniform(0, 0.2),
    )


@pytest.fixture
def system_factory():
    return make_system


ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
