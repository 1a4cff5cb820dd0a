"""Photon tunneling between coupled chiral microwave resonators.

Coupling laws, non-Hermitian mode dynamics, input-output S21 spectra,
frequency-distance sweeps, peak tracking, calibration fits and data ingest.
"""
from .coupling import (
    ChiralGeometry,
    CouplingParams,
    ThirdModeParams,
    delta_ab,
    delta_ac,
    delta_bc,
    omega_c,
    theta,
)
from .errors import ConfigError, DegenerateSystemError, FitError, ParseError
from .modes import (
    ComplexFrequency,
    ModeSystem,
    ResonatorMode,
    build_matrix,
    eigenfrequencies,
    eigenfrequencies_general,
    eigenfrequencies_two_mode,
)
from .presets import PRESETS, get_preset
from .transmission import DriveSpec, TransmissionPoint, mode_amplitudes, s21, spectrum

__version__ = "0.1.0"
