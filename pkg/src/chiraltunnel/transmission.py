"""Frequency-domain input-output solution and S21 of the coupled modes.

Mode amplitudes X solve ``[i(ω - H) - K] X = i sqrt(β) e^{iθ} P_in`` where H is
the coupling matrix from :func:`build_matrix` and ``K_ij = sqrt(β_i β_j)`` is the
damping shared through the feed line. The output field is
``P_out = P_in - 2i Σ sqrt(β_X) X`` and ``S21 = P_out / P_in - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateSystemError
from .modes import ModeSystem, build_matrix


@dataclass(frozen=True)
class DriveSpec:
    """Per-mode drive phases in radians. Only differences between them are physical."""

    theta_a: float = 0.0
    theta_b: float = 0.0
    theta_c: float = 0.0

    def canonical(self) -> "DriveSpec":
        return DriveSpec(0.0, self.theta_b - self.theta_a, self.theta_c - self.theta_a)

    def phases(self, n_modes: int) -> np.ndarray:
        return np.array((self.theta_a, self.theta_b, self.theta_c)[:n_modes])


@dataclass(frozen=True)
class TransmissionPoint:
    frequency: float
    s21: complex
    s21_mag_db: float


def magnitude_db(s21):
    """20 log10 |S21|; exact zeros map to -inf."""
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(s21))


def _line_couplings(system: ModeSystem) -> np.ndarray:
    return np.array([m.line_coupling for m in system.modes], dtype=float)


def _system_matrices(system: ModeSystem, omegas: np.ndarray) -> np.ndarray:
    h = build_matrix(system)
    beta = _line_couplings(system)
    k = np.sqrt(np.outer(beta, beta))
    n = h.shape[0]
    m = np.empty((omegas.size, n, n), dtype=complex)
    m[:] = -1j * h - k
    idx = np.arange(n)
    m[:, idx, idx] += 1j * omegas[:, None]
    return m


def _drive_vector(system: ModeSystem, drive: DriveSpec, p_in: complex) -> np.ndarray:
    beta = _line_couplings(system)
    return 1j * np.sqrt(beta) * np.exp(1j * drive.phases(system.n_modes)) * p_in


def solve_closed_form(m: np.ndarray, rhs: np.ndarray):
    """Cramer's-rule solve of a batch of 2x2 or 3x3 systems.

    ``m`` has shape (N, n, n) and ``rhs`` shape (n,). Returns ``(x, det)`` with
    ``x`` of shape (N, n); rows with ``det == 0`` are left as NaN.
    """
    n = m.shape[-1]
    b = rhs
    if n == 2:
        a, bb, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
        det = a * d - bb * c
        num = np.stack((b[0] * d - bb * b[1], a * b[1] - c * b[0]), axis=-1)
    elif n == 3:
        # cofactors C_ij; det by first-row expansion, x = adj(m) b / det
        c00 = m[:, 1, 1] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 1]
        c01 = m[:, 1, 2] * m[:, 2, 0] - m[:, 1, 0] * m[:, 2, 2]
        c02 = m[:, 1, 0] * m[:, 2, 1] - m[:, 1, 1] * m[:, 2, 0]
        c10 = m[:, 0, 2] * m[:, 2, 1] - m[:, 0, 1] * m[:, 2, 2]
        c11 = m[:, 0, 0] * m[:, 2, 2] - m[:, 0, 2] * m[:, 2, 0]
        c12 = m[:, 0, 1] * m[:, 2, 0] - m[:, 0, 0] * m[:, 2, 1]
        c20 = m[:, 0, 1] * m[:, 1, 2] - m[:, 0, 2] * m[:, 1, 1]
        c21 = m[:, 0, 2] * m[:, 1, 0] - m[:, 0, 0] * m[:, 1, 2]
        c22 = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
        det = m[:, 0, 0] * c00 + m[:, 0, 1] * c01 + m[:, 0, 2] * c02
        num = np.stack(
            (
                c00 * b[0] + c10 * b[1] + c20 * b[2],
                c01 * b[0] + c11 * b[1] + c21 * b[2],
                c02 * b[0] + c12 * b[1] + c22 * b[2],
            ),
            axis=-1,
        )
    else:
        raise ConfigError(f"closed-form solve supports 2 or 3 modes, got {n}")
    singular = det == 0
    safe = np.where(singular, 1.0, det)
    x = num / safe[:, None]
    x[singular] = np.nan
    return x, det


def _check(omegas: np.ndarray, x: np.ndarray) -> None:
    bad = ~np.all(np.isfinite(x), axis=-1)
    if bad.any():
        raise DegenerateSystemError(float(omegas[np.argmax(bad)]))


def amplitudes_array(system: ModeSystem, drive: DriveSpec, omegas, p_in: complex = 1.0) -> np.ndarray:
    """Mode amplitudes at each frequency in ``omegas``; shape (N, n_modes)."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    x, _ = solve_closed_form(_system_matrices(system, w), _drive_vector(system, drive, p_in))
    _check(w, x)
    return x


def s21_array(system: ModeSystem, drive: DriveSpec, omegas, p_in: complex = 1.0) -> np.ndarray:
    """Complex S21 at each frequency in ``omegas``."""
    x = amplitudes_array(system, drive, omegas, p_in)
    roots = np.sqrt(_line_couplings(system))
    # fixed-order elementwise sum: each frequency's value is independent of the batch
    acc = x[:, 0] * roots[0]
    for k in range(1, roots.size):
        acc = acc + x[:, k] * roots[k]
    return (-2j * acc) / p_in


def mode_amplitudes(system: ModeSystem, drive: DriveSpec, omega: float, p_in: complex = 1.0) -> np.ndarray:
    """Complex amplitude of each mode (A, B[, C]) at drive frequency ``omega``."""
    if not omega > 0:
        raise ConfigError(f"omega must be > 0 GHz, got {omega!r}")
    return amplitudes_array(system, drive, [omega], p_in)[0]


def s21(system: ModeSystem, drive: DriveSpec, omega: float) -> TransmissionPoint:
    if not omega > 0:
        raise ConfigError(f"omega must be > 0 GHz, got {omega!r}")
    value = complex(s21_array(system, drive, [omega])[0])
    return TransmissionPoint(float(omega), value, float(magnitude_db(value)))


def frequency_axis(f_min: float, f_max: float, n_points: int) -> np.ndarray:
    if not (0 < f_min < f_max):
        raise ConfigError(f"need 0 < f_min < f_max, got {f_min!r}, {f_max!r}")
    if int(n_points) != n_points or n_points < 2:
        raise ConfigError(f"n_points must be an integer >= 2, got {n_points!r}")
    return np.linspace(f_min, f_max, int(n_points))


def spectrum(system: ModeSystem, drive: DriveSpec, f_min: float, f_max: float,
             n_points: int) -> list[TransmissionPoint]:
    """Uniformly sampled S21 including both endpoints."""
    freqs = frequency_axis(f_min, f_max, n_points)
    values = s21_array(system, drive, freqs)
    db = magnitude_db(values)
    return [TransmissionPoint(float(f), complex(v), float(m)) for f, v, m in zip(freqs, values, db)]


def occupancy_asymmetry(system: ModeSystem, drive: DriveSpec, omega: float) -> float:
    """``|(|A| - |B|) / (|A| + |B|)|``: 0 for equal occupation, 1 when one mode is dark."""
    amps = np.abs(mode_amplitudes(system, drive, omega))
    total = amps[0] + amps[1]
    if total == 0:
        return 0.0
    return float(abs(amps[0] - amps[1]) / total)


__all__ = [
    "DriveSpec",
    "TransmissionPoint",
    "amplitudes_array",
    "frequency_axis",
    "magnitude_db",
    "mode_amplitudes",
    "occupancy_asymmetry",
    "s21",
    "s21_array",
    "solve_closed_form",
    "spectrum",
]
