"""Geometry-dependent coupling coefficients between the chiral resonator modes.

All rates are in GHz, lengths in mm and angles in radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError

TWO_PI = 2.0 * math.pi
_HALF_PI = 0.5 * math.pi

# (sin, cos) at k * pi/2
_QUADRANT = ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))


def reduce_angle(phi: float) -> float:
    """Canonical representative of ``phi`` in [0, 2*pi)."""
    r = math.fmod(phi, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


def _sincos(x: float) -> tuple[float, float]:
    # Angles within rounding of a multiple of pi/2 get exact values, so that
    # the landmark zeros of theta() are exact zeros.
    n = x / _HALF_PI
    k = round(n)
    if abs(n - k) <= 4.0 * math.ulp(max(abs(n), 1.0)):
        return _QUADRANT[int(k) % 4]
    return math.sin(x), math.cos(x)


def theta(delta_phi: float) -> float:
    """Angular prefactor of the tunneling amplitude.

    ``(phi/2pi) * sin(phi/2) * (sin(phi/2) + cos(phi/2))`` evaluated on the
    representative of ``delta_phi`` in [0, 2*pi), which makes it periodic.
    """
    phi = reduce_angle(delta_phi)
    # sin(h)(sin h + cos h) with h = phi/2, rewritten on the full angle
    s, c = _sincos(phi)
    return (phi / TWO_PI) * 0.5 * ((1.0 - c) + s)


@dataclass(frozen=True)
class ChiralGeometry:
    """Relative orientation ``delta_phi`` (rad), spacing ``d`` and decay length ``d0`` (mm)."""

    delta_phi: float
    d: float
    d0: float

    def __post_init__(self):
        object.__setattr__(self, "delta_phi", reduce_angle(float(self.delta_phi)))
        if not math.isfinite(self.d) or self.d < 0:
            raise ConfigError(f"d must be >= 0 mm, got {self.d!r}")
        if not math.isfinite(self.d0) or self.d0 <= 0:
            raise ConfigError(f"d0 must be > 0 mm, got {self.d0!r}")


@dataclass(frozen=True)
class ThirdModeParams:
    """Couplings and frequency line of the diffuse third mode."""

    j1: float
    j2: float
    omega_c_slope: float
    omega_c_intercept: float
    gamma: float = 0.1

    def __post_init__(self):
        for name in ("j1", "j2", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be >= 0 GHz, got {value!r}")
        for name in ("omega_c_slope", "omega_c_intercept"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    def check_range(self, d_min: float, d_max: float) -> None:
        """Raise ConfigError unless omega_c stays positive on [d_min, d_max]."""
        for d in (d_min, d_max):
            omega_c(self, d)


@dataclass(frozen=True)
class CouplingParams:
    geometry: ChiralGeometry
    g0: float = 1.0
    third: Optional[ThirdModeParams] = field(default=None)

    def __post_init__(self):
        if not math.isfinite(self.g0) or self.g0 <= 0:
            raise ConfigError(f"g0 must be > 0 GHz, got {self.g0!r}")

    def at_distance(self, d: float) -> "CouplingParams":
        g = self.geometry
        return CouplingParams(ChiralGeometry(g.delta_phi, d, g.d0), self.g0, self.third)


def delta_ab(params: CouplingParams) -> float:
    """Tunneling coupling between the two resonators, ``g0 * theta * exp(-d/d0)``.

    Negative values are the negative-coupling regime (Δφ in (3π/2, 2π)).
    """
    g = params.geometry
    return params.g0 * theta(g.delta_phi) * math.exp(-g.d / g.d0)


def delta_ac(third: ThirdModeParams, delta_phi: float) -> float:
    c = _sincos(reduce_angle(delta_phi))[1]
    return third.j1 * c * c


def delta_bc(third: ThirdModeParams, delta_phi: float) -> float:
    s = _sincos(reduce_angle(delta_phi))[0]
    return third.j2 * s * s


def omega_c(third: ThirdModeParams, d: float) -> float:
    """Third-mode frequency (GHz) from its linear distance law."""
    if d < 0:
        raise ConfigError(f"d must be >= 0 mm, got {d!r}")
    w = third.omega_c_slope * d + third.omega_c_intercept
    if not w > 0:
        raise ConfigError(
            f"third-mode frequency {w!r} GHz is not positive at d={d!r} mm "
            f"(slope={third.omega_c_slope}, intercept={third.omega_c_intercept})"
        )
    return w
