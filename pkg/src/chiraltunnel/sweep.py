"""Frequency-distance transmission grids, coupling phase diagrams and peak tracking."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import signal

from .coupling import ChiralGeometry, CouplingParams, delta_ab
from .errors import ConfigError, DegenerateSystemError, ParseError
from .modes import ModeSystem
from .transmission import DriveSpec, frequency_axis, magnitude_db, s21_array

BRANCHES = ("lower", "upper", "third", "single")
_ORDERED_LABELS = {1: ("single",), 2: ("lower", "upper"), 3: ("lower", "upper", "third")}


def linear_axis(v_min: float, v_max: float, n: int, name: str = "axis") -> np.ndarray:
    """``n`` evenly spaced values from ``v_min`` to ``v_max`` inclusive.

    A single-point axis is allowed only when ``v_min == v_max``.
    """
    if int(n) != n or n < 1:
        raise ConfigError(f"{name}: number of points must be a positive integer, got {n!r}")
    n = int(n)
    if n == 1:
        if v_min != v_max:
            raise ConfigError(f"{name}: a single point needs min == max")
        return np.array([float(v_min)])
    if not v_min < v_max:
        raise ConfigError(f"{name}: need min < max, got {v_min!r}, {v_max!r}")
    return np.linspace(v_min, v_max, n)


@dataclass
class SpectrumGrid:
    """|S21| in dB indexed ``values[distance][frequency]``."""

    freq_axis: np.ndarray
    dist_axis: np.ndarray
    values: np.ndarray
    complex_values: Optional[np.ndarray] = None

    def __post_init__(self):
        self.freq_axis = np.asarray(self.freq_axis, dtype=float)
        self.dist_axis = np.asarray(self.dist_axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        shape = (self.dist_axis.size, self.freq_axis.size)
        if self.values.shape != shape:
            raise ConfigError(f"values shape {self.values.shape} does not match axes {shape}")
        if self.complex_values is not None and np.shape(self.complex_values) != shape:
            raise ConfigError("complex_values shape does not match axes")
        for name, axis in (("freq_axis", self.freq_axis), ("dist_axis", self.dist_axis)):
            if np.any(np.diff(axis) <= 0):
                raise ConfigError(f"{name} must be strictly increasing")

    @property
    def freq_step(self) -> float:
        return float(self.freq_axis[1] - self.freq_axis[0]) if self.freq_axis.size > 1 else 0.0


@dataclass(frozen=True)
class Peak:
    d: float
    f: float
    mag_db: float
    branch: str


@dataclass
class PeakSet:
    peaks: list[Peak] = field(default_factory=list)

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def branch(self, name: str) -> list[Peak]:
        return [p for p in self.peaks if p.branch == name]

    def rows(self) -> dict[float, list[Peak]]:
        out: dict[float, list[Peak]] = {}
        for p in self.peaks:
            out.setdefault(p.d, []).append(p)
        return out


@dataclass
class PhaseDiagram:
    """Δ_AB in GHz indexed ``coupling[d][phi]``; ``phi_axis`` in radians."""

    d_axis: np.ndarray
    phi_axis: np.ndarray
    coupling: np.ndarray


def _row(template: ModeSystem, drive: DriveSpec, freqs: np.ndarray, d: float) -> np.ndarray:
    system = template.at_distance(float(d))
    try:
        return s21_array(system, drive, freqs)
    except DegenerateSystemError as exc:
        raise DegenerateSystemError(
            exc.frequency, f"singular coupled-mode system at d={float(d)!r} mm"
        ) from exc


def grid_sweep(system_template: ModeSystem, drive: DriveSpec, freq_range, dist_range,
               workers: int = 1) -> SpectrumGrid:
    """Evaluate S21 on every (distance, frequency) pair.

    ``freq_range`` and ``dist_range`` are ``(min, max, n_points)`` triples.
    Rows are independent, so ``workers > 1`` computes them on a thread pool;
    the result does not depend on the worker count.
    """
    freqs = frequency_axis(*freq_range)
    dists = linear_axis(*dist_range, name="distance")
    if dists[0] < 0:
        raise ConfigError("distances must be >= 0 mm")
    third = system_template.coupling.third
    if third is not None:
        third.check_range(float(dists[0]), float(dists[-1]))

    def work(d):
        return _row(system_template, drive, freqs, d)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(work, dists))
    else:
        rows = [work(d) for d in dists]
    complex_values = np.vstack(rows)
    return SpectrumGrid(freqs, dists, magnitude_db(complex_values), complex_values)


def _refine(freqs: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Parabolic vertex through the three samples around index ``i``."""
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0 or not np.isfinite(denom):
        return float(freqs[i]), float(y1)
    delta = 0.5 * (y0 - y2) / denom
    step = freqs[i + 1] - freqs[i]
    return float(freqs[i] + delta * step), float(y1 - 0.25 * (y0 - y2) * delta)


def _label(current: list[tuple[float, float]], previous: Optional[list[tuple[float, str]]]) -> list[str]:
    labels = list(_ORDERED_LABELS[len(current)])
    if not previous or len(previous) != len(current) or len(current) == 1:
        return labels
    # greedy nearest-frequency matching against the previous row
    pairs = sorted(
        (abs(f - pf), i, j)
        for i, (f, _) in enumerate(current)
        for j, (pf, _) in enumerate(previous)
    )
    taken_cur, taken_prev, out = set(), set(), [None] * len(current)
    for _, i, j in pairs:
        if i in taken_cur or j in taken_prev:
            continue
        out[i] = previous[j][1]
        taken_cur.add(i)
        taken_prev.add(j)
    return out


def find_peaks(grid: SpectrumGrid, f_min: float = 5.0, f_max: float = 10.0,
               prominence_db: float = 1.0,
               third_line: Optional[Callable[[float], float]] = None) -> PeakSet:
    """Resonance maxima of |S21| (dB) per distance row inside ``[f_min, f_max]``.

    Maxima must stand out by ``prominence_db``; positions are refined by a
    three-point parabola. At most three peaks per row are kept (the most
    prominent), labelled by frequency order and carried across rows by greedy
    nearest-frequency matching. Labels may swap near anti-crossings.

    Parameters
    ----------
    third_line : callable, optional
        Bare third-mode frequency as a function of distance. When given, the
        peak nearest ``third_line(d)`` in every row with two or more peaks is
        labelled ``third`` and the remaining peaks are labelled as above.
    """
    if not prominence_db > 0:
        raise ConfigError(f"prominence_db must be > 0, got {prominence_db!r}")
    freqs = grid.freq_axis
    tol = 1e-9 * max(abs(freqs[-1]), 1.0)
    if not (f_min < f_max and f_min >= freqs[0] - tol and f_max <= freqs[-1] + tol):
        raise ConfigError(
            f"window {f_min}:{f_max} GHz is outside the grid range "
            f"{freqs[0]:.9g}:{freqs[-1]:.9g} GHz"
        )
    sel = np.nonzero((freqs >= f_min - tol) & (freqs <= f_max + tol))[0]
    lo, hi = int(sel[0]), int(sel[-1]) + 1
    wf = freqs[lo:hi]

    peaks: list[Peak] = []
    previous = None
    for d, row in zip(grid.dist_axis, grid.values):
        y = np.array(row[lo:hi], dtype=float)
        finite = np.isfinite(y)
        if not finite.any():
            previous = None
            continue
        y[~finite] = np.min(y[finite])
        idx, props = signal.find_peaks(y, prominence=prominence_db)
        if idx.size > 3:
            keep = np.sort(np.argsort(props["prominences"], kind="stable")[::-1][:3])
            idx = idx[keep]
        found = [_refine(wf, y, int(i)) for i in idx]
        if not found:
            previous = None
            continue
        if third_line is not None and len(found) >= 2:
            wc = float(third_line(float(d)))
            k = min(range(len(found)), key=lambda i: (abs(found[i][0] - wc), i))
            rest = found[:k] + found[k + 1:]
            prev = [p for p in previous or () if p[1] != "third"]
            labels = _label(rest, prev)
            labels.insert(k, "third")
        else:
            labels = _label(found, previous)
        row_peaks = [Peak(float(d), f, m, lab) for (f, m), lab in zip(found, labels)]
        peaks.extend(row_peaks)
        previous = [(p.f, p.branch) for p in row_peaks]
    return PeakSet(peaks)


def phase_diagram(g0: float, d0: float, d_range, phi_range) -> PhaseDiagram:
    """Δ_AB over a (distance, orientation) grid; ranges are ``(min, max, n)``."""
    d_axis = linear_axis(*d_range, name="distance")
    phi_axis = linear_axis(*phi_range, name="phi")
    out = np.empty((d_axis.size, phi_axis.size))
    for i, d in enumerate(d_axis):
        for j, phi in enumerate(phi_axis):
            out[i, j] = delta_ab(CouplingParams(ChiralGeometry(float(phi), float(d), d0), g0))
    return PhaseDiagram(d_axis, phi_axis, out)


# -- serialization -----------------------------------------------------------

def fmt(x: float) -> str:
    """Nine significant digits."""
    return format(float(x), ".9g")


def _comment_block(comments: Iterable[str]) -> str:
    return "".join(f"# {c}\n" for c in comments)


def grid_to_csv(grid: SpectrumGrid, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(_comment_block(comments))
    buf.write("d_mm,frequency_ghz,s21_mag_db\n")
    for d, row in zip(grid.dist_axis, grid.values):
        ds = fmt(d)
        for f, v in zip(grid.freq_axis, row):
            buf.write(f"{ds},{fmt(f)},{fmt(v)}\n")
    return buf.getvalue()


def _data_lines(text):
    if isinstance(text, bytes):
        text = text.decode("ascii")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def grid_from_csv(text) -> SpectrumGrid:
    """Inverse of :func:`grid_to_csv` (complex values are not stored)."""
    lines = _data_lines(text)
    header = next(lines, None)
    if header is None or header[1] != "d_mm,frequency_ghz,s21_mag_db":
        raise ParseError("expected header d_mm,frequency_ghz,s21_mag_db", header and header[0])
    rows: dict[float, list[tuple[float, float]]] = {}
    for lineno, line in lines:
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError("expected 3 fields", lineno)
        try:
            d, f, v = (float(p) for p in parts)
        except ValueError:
            raise ParseError("non-numeric field", lineno) from None
        rows.setdefault(d, []).append((f, v))
    if not rows:
        raise ParseError("no data rows")
    dists = sorted(rows)
    freqs = [f for f, _ in rows[dists[0]]]
    values = []
    for d in dists:
        if [f for f, _ in rows[d]] != freqs:
            raise ParseError(f"row d={d} has a different frequency axis")
        values.append([v for _, v in rows[d]])
    return SpectrumGrid(np.array(freqs), np.array(dists), np.array(values))


def peaks_to_csv(peaks: PeakSet, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(_comment_block(comments))
    buf.write("d_mm,frequency_ghz,mag_db,branch\n")
    for p in peaks:
        buf.write(f"{fmt(p.d)},{fmt(p.f)},{fmt(p.mag_db)},{p.branch}\n")
    return buf.getvalue()


def peaks_from_csv(text) -> PeakSet:
    lines = _data_lines(text)
    header = next(lines, None)
    if header is None or header[1] != "d_mm,frequency_ghz,mag_db,branch":
        raise ParseError("expected header d_mm,frequency_ghz,mag_db,branch", header and header[0])
    out = []
    for lineno, line in lines:
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError("expected 4 fields", lineno)
        if parts[3] not in BRANCHES:
            raise ParseError(f"unknown branch label {parts[3]!r}", lineno)
        try:
            out.append(Peak(float(parts[0]), float(parts[1]), float(parts[2]), parts[3]))
        except ValueError:
            raise ParseError("non-numeric field", lineno) from None
    return PeakSet(out)


def phase_diagram_to_csv(diagram: PhaseDiagram, comments: Sequence[str] = ()) -> str:
    """Wide CSV: one row per distance, one column per orientation (degrees)."""
    buf = io.StringIO()
    buf.write(_comment_block(comments))
    buf.write("d_mm," + ",".join(fmt(math.degrees(p)) for p in diagram.phi_axis) + "\n")
    for d, row in zip(diagram.d_axis, diagram.coupling):
        buf.write(fmt(d) + "," + ",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def heatmap_pgm(grid: SpectrumGrid) -> bytes:
    """Binary greyscale PGM: one pixel per cell, top row = smallest distance.

    dB values are mapped linearly, min -> 0 and max -> 255; non-finite cells
    are clipped to the finite range.
    """
    v = np.array(grid.values, dtype=float)
    finite = np.isfinite(v)
    if finite.any():
        lo, hi = float(v[finite].min()), float(v[finite].max())
    else:
        lo = hi = 0.0
    v = np.where(np.isnan(v), lo, np.clip(v, lo, hi))
    if hi > lo:
        pix = np.rint((v - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        pix = np.zeros(v.shape, dtype=np.uint8)
    rows, cols = pix.shape
    header = f"P5\n# min_db={fmt(lo)} max_db={fmt(hi)}\n{cols} {rows}\n255\n".encode("ascii")
    return header + pix.tobytes()


def read_pgm(data: bytes) -> tuple[np.ndarray, str]:
    """Pixels and comment text of a P5 file written by :func:`heatmap_pgm`."""
    lines = data.split(b"\n", 4)
    if len(lines) < 5 or lines[0] != b"P5":
        raise ParseError("not a binary PGM (P5)")
    comment = lines[1].decode("ascii").lstrip("# ")
    cols, rows = (int(x) for x in lines[2].split())
    if int(lines[3]) != 255:
        raise ParseError("maxval must be 255")
    pix = np.frombuffer(lines[4], dtype=np.uint8)
    if pix.size != rows * cols:
        raise ParseError("pixel count does not match dimensions")
    return pix.reshape(rows, cols), comment
