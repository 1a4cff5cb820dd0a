"""Readers and writers for measured transmission data.

Touchstone v1 two-port files (``.s2p``) and two spectrum CSV layouts::

    frequency_ghz,s21_re,s21_im
    frequency_ghz,s21_mag_db        (phase is set to zero)

Input may be ``str`` or ``bytes``, with LF or CRLF line endings. Output uses LF.
"""
from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass

from .errors import ParseError

_UNIT_TO_GHZ = {"HZ": 1e-9, "KHZ": 1e-6, "MHZ": 1e-3, "GHZ": 1.0}
_FORMATS = ("RI", "MA", "DB")
RI_HEADER = "frequency_ghz,s21_re,s21_im"
DB_HEADER = "frequency_ghz,s21_mag_db"


@dataclass(frozen=True)
class TouchstoneOptions:
    unit: str = "GHZ"
    parameter: str = "S"
    fmt: str = "MA"
    resistance: float = 50.0


@dataclass(frozen=True)
class TouchstoneRecord:
    frequency: float  # GHz
    s11: complex
    s21: complex
    s12: complex
    s22: complex


@dataclass(frozen=True)
class MeasuredSpectrum:
    points: tuple[tuple[float, complex], ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((float(f), complex(s)) for f, s in self.points))
        if not self.points:
            raise ValueError("spectrum has no points")
        freqs = [f for f, _ in self.points]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("frequencies must be strictly increasing")

    @property
    def frequencies(self) -> list[float]:
        return [f for f, _ in self.points]

    @property
    def s21(self) -> list[complex]:
        return [s for _, s in self.points]


def _text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        try:
            return bytes(data).decode("ascii")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not ASCII ({exc.reason})") from None
    return data


def _pair(fmt: str, a: float, b: float) -> complex:
    if fmt == "RI":
        return complex(a, b)
    mag = a if fmt == "MA" else 10.0 ** (a / 20.0)
    return cmath.rect(mag, math.radians(b))


def _parse_option_line(line: str, lineno: int) -> TouchstoneOptions:
    tokens = line[1:].split()
    unit, parameter, fmt, resistance = "GHZ", "S", "MA", 50.0
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in _UNIT_TO_GHZ:
            unit = tok
        elif tok in _FORMATS:
            fmt = tok
        elif tok in ("S", "Y", "Z", "H", "G"):
            parameter = tok
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise ParseError("option line: R without a value", lineno)
            try:
                resistance = float(tokens[i + 1])
            except ValueError:
                raise ParseError(f"option line: bad resistance {tokens[i + 1]!r}", lineno) from None
            i += 1
        else:
            raise ParseError(f"option line: unknown token {tokens[i]!r}", lineno)
        i += 1
    if parameter != "S":
        raise ParseError(f"option line: only S parameters are supported, got {parameter}", lineno)
    return TouchstoneOptions(unit, parameter, fmt, resistance)


def parse_touchstone_full(data) -> tuple[TouchstoneOptions, list[TouchstoneRecord]]:
    """Options and records of a Touchstone v1 two-port file."""
    options = None
    records: list[TouchstoneRecord] = []
    last_f = None
    for lineno, raw in enumerate(_text(data).splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if options is not None:
                raise ParseError("second option line", lineno)
            options = _parse_option_line(line, lineno)
            continue
        if line.startswith("["):
            raise ParseError("Touchstone v2 keywords are not supported", lineno)
        if options is None:
            raise ParseError("data before the option line", lineno)
        fields = line.split()
        if len(fields) != 9:
            raise ParseError(f"expected 9 numbers, got {len(fields)}", lineno)
        try:
            v = [float(x) for x in fields]
        except ValueError:
            raise ParseError("non-numeric field", lineno) from None
        f = v[0] * _UNIT_TO_GHZ[options.unit]
        if not f > 0:
            raise ParseError(f"frequency must be > 0, got {fields[0]}", lineno)
        if last_f is not None and f <= last_f:
            raise ParseError("frequencies must be strictly increasing", lineno)
        last_f = f
        s11, s21, s12, s22 = (_pair(options.fmt, v[k], v[k + 1]) for k in (1, 3, 5, 7))
        records.append(TouchstoneRecord(f, s11, s21, s12, s22))
    if options is None:
        raise ParseError("missing option line ('# <unit> S <RI|MA|DB> R <ohms>')")
    return options, records


def parse_touchstone(data) -> list[TouchstoneRecord]:
    """Records of a Touchstone v1 ``.s2p`` file, frequencies in GHz."""
    return parse_touchstone_full(data)[1]


def write_touchstone(records, comments=()) -> str:
    """Touchstone v1 text in ``# GHz S RI R 50`` form, 9 significant digits."""
    buf = io.StringIO()
    for c in comments:
        buf.write(f"! {c}\n")
    buf.write("# GHz S RI R 50\n")
    for r in records:
        nums = [r.frequency]
        for s in (r.s11, r.s21, r.s12, r.s22):
            nums += [s.real, s.imag]
        buf.write(" ".join(_fmt(x) for x in nums) + "\n")
    return buf.getvalue()


def touchstone_to_spectrum(records, source: str = "") -> MeasuredSpectrum:
    if not records:
        raise ParseError("no data rows")
    return MeasuredSpectrum(tuple((r.frequency, r.s21) for r in records), source)


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def parse_spectrum_csv(data, source: str = "csv") -> MeasuredSpectrum:
    """Spectrum CSV in the RI or dB-magnitude layout. ``#`` lines are comments."""
    header = None
    points = []
    for lineno, raw in enumerate(_text(data).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.replace(" ", "")
            if header not in (RI_HEADER, DB_HEADER):
                raise ParseError(f"unknown header {line!r}", lineno)
            width = 3 if header == RI_HEADER else 2
            continue
        fields = line.split(",")
        if len(fields) != width:
            raise ParseError(f"expected {width} fields, got {len(fields)}", lineno)
        try:
            v = [float(x) for x in fields]
        except ValueError:
            raise ParseError("non-numeric field", lineno) from None
        if points and v[0] <= points[-1][0]:
            raise ParseError("frequencies must be strictly increasing", lineno)
        s = complex(v[1], v[2]) if width == 3 else complex(10.0 ** (v[1] / 20.0), 0.0)
        points.append((v[0], s))
    if header is None:
        raise ParseError("missing header")
    if not points:
        raise ParseError("no data rows")
    return MeasuredSpectrum(tuple(points), source)


def serialize_spectrum(spectrum: MeasuredSpectrum, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(RI_HEADER + "\n")
    for f, s in spectrum.points:
        buf.write(f"{_fmt(f)},{_fmt(s.real)},{_fmt(s.imag)}\n")
    return buf.getvalue()


def load_spectrum(path) -> MeasuredSpectrum:
    """Read a ``.s2p``/``.ts`` Touchstone file or a spectrum CSV, chosen by suffix."""
    name = str(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if name.lower().endswith((".s2p", ".ts")):
        return touchstone_to_spectrum(parse_touchstone(data), f"{name} (touchstone)")
    return parse_spectrum_csv(data, f"{name} (csv)")
