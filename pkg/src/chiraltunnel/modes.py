"""Non-Hermitian coupling matrices and hybridized eigenfrequencies."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .coupling import CouplingParams, delta_ab, delta_ac, delta_bc, omega_c
from .errors import ConfigError


@dataclass(frozen=True)
class ResonatorMode:
    """Bare mode: resonance ``omega_r``, intrinsic ``dissipation`` and line coupling, all GHz."""

    omega_r: float
    dissipation: float = 0.0
    line_coupling: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.omega_r) or self.omega_r <= 0:
            raise ConfigError(f"omega_r must be > 0 GHz, got {self.omega_r!r}")
        for name in ("dissipation", "line_coupling"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be >= 0 GHz, got {value!r}")

    @property
    def complex_frequency(self) -> complex:
        return complex(self.omega_r, -self.dissipation)


@dataclass(frozen=True)
class ModeSystem:
    mode_a: ResonatorMode
    mode_b: ResonatorMode
    coupling: CouplingParams
    mode_c: Optional[ResonatorMode] = None

    def __post_init__(self):
        if (self.mode_c is None) != (self.coupling.third is None):
            raise ConfigError("mode_c and coupling.third must be given together")

    @property
    def n_modes(self) -> int:
        return 2 if self.mode_c is None else 3

    @property
    def modes(self) -> tuple[ResonatorMode, ...]:
        if self.mode_c is None:
            return (self.mode_a, self.mode_b)
        return (self.mode_a, self.mode_b, self.mode_c)

    def at_distance(self, d: float) -> "ModeSystem":
        """Same device at spacing ``d``; the third mode follows its frequency line."""
        coupling = self.coupling.at_distance(d)
        mode_c = self.mode_c
        if mode_c is not None:
            third = coupling.third
            mode_c = replace(mode_c, omega_r=omega_c(third, d), dissipation=third.gamma)
        return replace(self, coupling=coupling, mode_c=mode_c)


@dataclass(frozen=True, order=False)
class ComplexFrequency:
    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self):
        return self.value


def _sort_key(z: complex):
    return (-z.real, -z.imag)


def _to_frequencies(values) -> list[ComplexFrequency]:
    return [ComplexFrequency(z.real, z.imag) for z in sorted(values, key=_sort_key)]


def build_matrix(system: ModeSystem) -> np.ndarray:
    """Complex symmetric coupling matrix in GHz, rows/columns ordered (A, B[, C]).

    For three modes the off-diagonals are laid out as
    (A,B) = Δ_AB, (A,C) = Δ_BC, (B,C) = Δ_AC.
    """
    c = system.coupling
    dab = delta_ab(c)
    n = system.n_modes
    h = np.zeros((n, n), dtype=complex)
    for i, mode in enumerate(system.modes):
        h[i, i] = mode.complex_frequency
    h[0, 1] = h[1, 0] = dab
    if n == 3:
        phi = c.geometry.delta_phi
        h[0, 2] = h[2, 0] = delta_bc(c.third, phi)
        h[1, 2] = h[2, 1] = delta_ac(c.third, phi)
    return h


def eigenfrequencies_two_mode(system: ModeSystem) -> tuple[ComplexFrequency, ComplexFrequency]:
    """Closed-form hybridized pair ε± for a two-mode system."""
    if system.mode_c is not None:
        raise ConfigError("eigenfrequencies_two_mode needs a system without a third mode")
    wa = system.mode_a.complex_frequency
    wb = system.mode_b.complex_frequency
    dab = delta_ab(system.coupling)
    mean = 0.5 * (wa + wb)
    root = cmath.sqrt(dab * dab + (0.5 * (wa - wb)) ** 2)
    hi, lo = _to_frequencies((mean + root, mean - root))
    return hi, lo


def _newton(x: complex, p: complex, q: complex) -> complex:
    """One Newton step on t^3 + p t + q, kept only if it lowers the residual."""
    f = (x * x + p) * x + q
    df = 3.0 * x * x + p
    if df == 0:
        return x
    x_new = x - f / df
    if abs((x_new * x_new + p) * x_new + q) < abs(f):
        return x_new
    return x


def _cubic_roots(p: complex, q: complex) -> list[complex]:
    """Roots of the depressed cubic t^3 + p t + q.

    Cardano gives the largest-magnitude root, which is simple whenever a
    double root exists, and one Newton step polishes it. The other two come
    from the deflated quadratic t^2 + x1 t + (p + x1^2): the larger by the
    cancellation-free branch, the smaller from the product of the pair. They
    are not polished, since Newton stalls near a double root and would break
    the zero sum of the three roots.
    """
    disc = cmath.sqrt(0.25 * q * q + p**3 / 27.0)
    # pick the branch that avoids cancellation
    w = -0.5 * q + disc
    w_alt = -0.5 * q - disc
    if abs(w_alt) > abs(w):
        w = w_alt
    if w == 0:
        return [0j, 0j, 0j]
    u = w ** (1.0 / 3.0)
    rot = complex(-0.5, math.sqrt(3.0) / 2.0)
    candidates = []
    for _ in range(3):
        candidates.append(u - p / (3.0 * u))
        u *= rot
    x1 = _newton(max(candidates, key=abs), p, q)
    root = cmath.sqrt(-3.0 * x1 * x1 - 4.0 * p)
    x2 = 0.5 * (-x1 + root)
    x3 = 0.5 * (-x1 - root)
    if abs(x3) > abs(x2):
        x2 = x3
    x3 = (p + x1 * x1) / x2 if x2 != 0 else 0j
    return [x1, x2, x3]


def eigenfrequencies_general(matrix) -> list[ComplexFrequency]:
    """Eigenvalues of a 2x2 or 3x3 complex matrix, descending real part.

    Ties in the real part are broken by descending imaginary part.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 3):
        raise ConfigError(f"expected a 2x2 or 3x3 matrix, got shape {m.shape}")
    a = [[complex(m[i, j]) for j in range(m.shape[0])] for i in range(m.shape[0])]
    if m.shape[0] == 2:
        mean = 0.5 * (a[0][0] + a[1][1])
        root = cmath.sqrt((0.5 * (a[0][0] - a[1][1])) ** 2 + a[0][1] * a[1][0])
        return _to_frequencies((mean + root, mean - root))
    return _to_frequencies(eig3(a))


def eig3(a) -> list[complex]:
    """Unsorted eigenvalues of a 3x3 matrix given as nested sequences.

    The characteristic polynomial is formed for ``a - (trace/3) I`` so its
    coefficients scale with the couplings rather than the absolute frequencies.
    """
    shift = (a[0][0] + a[1][1] + a[2][2]) / 3.0
    p, q, r = a[0][0] - shift, a[1][1] - shift, a[2][2] - shift
    minors = (
        p * q - a[0][1] * a[1][0]
        + p * r - a[0][2] * a[2][0]
        + q * r - a[1][2] * a[2][1]
    )
    det = (
        p * (q * r - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * r - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - q * a[2][0])
    )
    return [x + shift for x in _cubic_roots(minors, -det)]


def eigenfrequencies(system: ModeSystem) -> list[ComplexFrequency]:
    """Eigenfrequencies of ``system``; closed form for two modes, Cardano for three."""
    if system.mode_c is None:
        return list(eigenfrequencies_two_mode(system))
    return eigenfrequencies_general(build_matrix(system))


def third_branch(freqs: Sequence[ComplexFrequency], bare_omega_c: float) -> ComplexFrequency:
    """The eigenfrequency continuously connected to the bare third mode (nearest real part)."""
    return min(freqs, key=lambda z: (abs(z.re - bare_omega_c), -z.re))
