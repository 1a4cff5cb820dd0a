"""Parameter extraction from resonance peak positions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .coupling import ChiralGeometry, CouplingParams, ThirdModeParams, _sincos, delta_ab, omega_c, reduce_angle
from .errors import ConfigError, FitError
from .modes import ModeSystem, eig3


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    residual_rms: float
    n_points: int

    def report(self) -> str:
        return (
            f"slope_ghz_per_mm={self.slope!r}\n"
            f"intercept_ghz={self.intercept!r}\n"
            f"residual_rms={self.residual_rms!r}\n"
            f"n_points={self.n_points}\n"
        )


@dataclass(frozen=True)
class DecayFit:
    d0_hat: float
    g0_theta_hat: float
    residual_rms: float
    n_points: int

    def report(self) -> str:
        return (
            f"d0_mm={self.d0_hat!r}\n"
            f"g0_theta_ghz={self.g0_theta_hat!r}\n"
            f"residual_rms={self.residual_rms!r}\n"
            f"n_points={self.n_points}\n"
        )


@dataclass(frozen=True)
class JFit:
    j1_hat: float
    j2_hat: float
    residual_rms: float
    n_points: int
    history: tuple[float, ...] = field(default=(), repr=False)

    def __iter__(self):
        # allows ``j1, j2 = fit_j_parameters(...)``
        return iter((self.j1_hat, self.j2_hat))

    def report(self) -> str:
        return (
            f"j1_ghz={self.j1_hat!r}\n"
            f"j2_ghz={self.j2_hat!r}\n"
            f"residual_rms={self.residual_rms!r}\n"
            f"n_points={self.n_points}\n"
        )


def fit_line(points: Sequence[tuple[float, float]]) -> LineFit:
    """Ordinary least-squares line ``y = slope * x + intercept``."""
    if len(points) < 2:
        raise FitError(f"need at least 2 points, got {len(points)}")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx == 0:
        raise FitError("x values are all equal; slope is undetermined")
    slope = float(dx @ (y - ym)) / sxx
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    return LineFit(slope, intercept, float(np.sqrt(np.mean(resid**2))), len(points))


def fit_decay(splittings: Sequence[tuple[float, float]]) -> DecayFit:
    """Decay length and amplitude from splitting-versus-distance data.

    The splitting of two identical modes is ``2 * A * exp(-d / d0)``; a line
    through ``ln(split / 2)`` gives ``d0 = -1/slope`` and ``A = exp(intercept)``.
    """
    if len(splittings) < 2:
        raise FitError(f"need at least 2 points, got {len(splittings)}")
    for d, s in splittings:
        if not s > 0:
            raise FitError(f"splitting must be > 0, got {s!r} at d={d!r}")
    line = fit_line([(d, math.log(s / 2.0)) for d, s in splittings])
    if not line.slope < 0:
        raise FitError(f"splitting does not decay with distance (log-slope {line.slope:.6g})")
    return DecayFit(-1.0 / line.slope, math.exp(line.intercept), line.residual_rms, line.n_points)


def _third_branch_model(base: ModeSystem, phi: float, ds: np.ndarray, j1: np.ndarray,
                        j2: np.ndarray) -> np.ndarray:
    """Re of the third-mode eigenvalue for every (distance, candidate) pair.

    ``j1``/``j2`` are 1-D candidate arrays of equal length; returns shape
    (len(ds), len(j1)). The branch is the eigenvalue nearest the bare line.
    """
    third = base.coupling.third
    a = base.mode_a.complex_frequency
    b = base.mode_b.complex_frequency
    phi = reduce_angle(phi)
    sin_phi, cos_phi = _sincos(phi)
    c2, s2 = cos_phi * cos_phi, sin_phi * sin_phi
    g0, d0 = base.coupling.g0, base.coupling.geometry.d0
    out = np.empty((ds.size, j1.size))
    for i, d in enumerate(ds):
        d = float(d)
        wc = omega_c(third, d)
        c = complex(wc, -third.gamma)
        dab = delta_ab(CouplingParams(ChiralGeometry(phi, d, d0), g0))
        for k in range(j1.size):
            x = j2[k] * s2  # (A,C) entry
            y = j1[k] * c2  # (B,C) entry
            roots = eig3(((a, dab, x), (dab, b, y), (x, y, c)))
            out[i, k] = min((r.real for r in roots), key=lambda r: (abs(r - wc), -r))
    return out


def _sse(base, data, j1, j2):
    j1 = np.atleast_1d(np.asarray(j1, dtype=float))
    j2 = np.atleast_1d(np.asarray(j2, dtype=float))
    total = np.zeros(j1.size)
    for phi, ds, fs in data:
        model = _third_branch_model(base, phi, ds, j1, j2)
        total += np.sum((model - fs[:, None]) ** 2, axis=0)
    return total


def _coverage(phis: Sequence[float]) -> None:
    if not any(math.cos(p) ** 2 >= 0.5 for p in phis):
        raise FitError("cos^2 regime unconstrained: no orientation near 0 or 180 deg, J1 is not identifiable")
    if not any(math.sin(p) ** 2 >= 0.5 for p in phis):
        raise FitError("sin^2 regime unconstrained: no orientation near 90 or 270 deg, J2 is not identifiable")
    if len({round(reduce_angle(p), 12) for p in phis}) < 2:
        raise FitError("need third-branch peaks for at least 2 distinct orientations")


def fit_j_parameters(third_peaks_by_config: Mapping[float, Sequence[tuple[float, float]]],
                     base_params: ModeSystem, j_max: float = 0.2,
                     resolution: float = 1e-4) -> JFit:
    """Fit the third-mode couplings J1, J2 to observed third-branch frequencies.

    ``third_peaks_by_config`` maps an orientation Δφ (radians) to ``(d, f)``
    peak positions. ``base_params`` supplies the two-mode parameters, decay law
    and third-mode line; its J values are ignored. The search is coordinate
    descent on a grid over ``[0, j_max]`` refined by factors of ten down to
    ``resolution``.
    """
    if base_params.coupling.third is None:
        raise ConfigError("base_params needs third-mode parameters")
    _coverage(list(third_peaks_by_config))
    data = []
    n_points = 0
    # canonical order so the result does not depend on mapping order
    for phi in sorted(third_peaks_by_config, key=reduce_angle):
        pts = sorted(third_peaks_by_config[phi])
        if not pts:
            continue
        ds = np.array([p[0] for p in pts], dtype=float)
        fs = np.array([p[1] for p in pts], dtype=float)
        data.append((phi, ds, fs))
        n_points += len(pts)

    def grid(lo, hi, step):
        lo = max(0.0, lo)
        hi = min(j_max, hi)
        n = int(round((hi - lo) / step))
        return lo + step * np.arange(n + 1)

    j1 = j2 = 0.0
    best = float(_sse(base_params, data, j1, j2)[0])
    history = [best]
    step = 10 ** math.floor(math.log10(j_max / 10.0))
    lo1, hi1, lo2, hi2 = 0.0, j_max, 0.0, j_max
    while True:
        while True:
            changed = False
            for coord in (0, 1):
                if coord == 0:
                    cand = grid(lo1, hi1, step)
                    sse = _sse(base_params, data, cand, np.full(cand.size, j2))
                else:
                    cand = grid(lo2, hi2, step)
                    sse = _sse(base_params, data, np.full(cand.size, j1), cand)
                k = int(np.argmin(sse))
                if sse[k] < best:
                    best = float(sse[k])
                    if coord == 0:
                        j1 = float(cand[k])
                    else:
                        j2 = float(cand[k])
                    changed = True
                history.append(best)
            if not changed:
                break
        if step <= resolution * (1 + 1e-9):
            break
        lo1, hi1, lo2, hi2 = j1 - step, j1 + step, j2 - step, j2 + step
        step /= 10.0
    j1 = round(j1 / resolution) * resolution
    j2 = round(j2 / resolution) * resolution
    rms = math.sqrt(best / n_points) if n_points else 0.0
    return JFit(j1, j2, rms, n_points, tuple(history))


def third_branch_frequencies(base: ModeSystem, delta_phi: float, distances: Sequence[float]) -> list[float]:
    """Model third-branch frequencies at ``distances`` using ``base``'s J values."""
    third: ThirdModeParams = base.coupling.third
    ds = np.asarray(distances, dtype=float)
    col = _third_branch_model(base, delta_phi, ds, np.array([third.j1]), np.array([third.j2]))
    return [float(v) for v in col[:, 0]]


def with_j(base: ModeSystem, j1: float, j2: float) -> ModeSystem:
    third = replace(base.coupling.third, j1=j1, j2=j2)
    return replace(base, coupling=replace(base.coupling, third=third))
