"""Named device configurations P, Q, R, S.

Relative orientations, third-mode couplings, third-mode frequency lines and
the fabricated inter-resonator distances (mm) of the four chiral samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Preset:
    name: str
    delta_phi_deg: float
    j1: float
    j2: float
    omega_c_slope: float
    omega_c_intercept: float
    distances: tuple[float, ...]

    @property
    def delta_phi(self) -> float:
        return math.radians(self.delta_phi_deg)


_PQR_LINE = (-0.516, 10.02)
_S_LINE = (-0.506, 10.95)

PRESETS = {
    "P": Preset("P", 0.0, 0.055, 0.025, *_PQR_LINE,
                (0.205, 3.12, 5.12, 6.47, 7.38, 7.55, 7.84, 8.626)),
    "Q": Preset("Q", 90.0, 0.058, 0.033, *_PQR_LINE,
                (0.902, 2.078, 3.297, 4.415, 4.869, 5.326, 6.182, 6.218)),
    "R": Preset("R", 180.0, 0.045, 0.020, *_PQR_LINE,
                (0.912, 2.212, 3.594, 5.379, 6.563, 7.841, 8.572, 9.794)),
    "S": Preset("S", 270.0, 0.065, 0.045, *_S_LINE,
                (0.891, 2.103, 3.319, 4.394, 4.798, 5.288, 6.164, 6.218)),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name.upper()]
    except (KeyError, AttributeError):
        raise KeyError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}") from None
