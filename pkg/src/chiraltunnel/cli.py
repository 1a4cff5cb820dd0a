"""Command-line front end.

Configuration is resolved in three layers: preset, then the ``--config`` JSON
object, then explicit flags. Angles are degrees on the command line and in
config files, radians internally.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional

from . import calibration, ingest, sweep
from .coupling import ChiralGeometry, CouplingParams, ThirdModeParams, omega_c
from .errors import ConfigError, DegenerateSystemError, FitError, ParseError
from .modes import ModeSystem, ResonatorMode, eigenfrequencies
from .presets import PRESETS, get_preset
from .transmission import DriveSpec, spectrum

DEFAULTS = {
    "omega_r": 9.0,
    "alpha": 0.01,
    "beta_diss": 0.01,
    "beta_a": 0.05,
    "beta_b": 0.05,
    "beta_c": None,  # 0.5 * beta_a
    "g0": 1.0,
    "d0": 2.0,
    "gamma": 0.1,
    "third_enabled": False,
    "theta_a": 0.0,
    "theta_b": 0.0,
    "theta_c": 0.0,
}
GEOMETRY_KEYS = ("delta_phi", "d")
THIRD_KEYS = ("j1", "j2", "omega_c_slope", "omega_c_intercept")


@dataclass(frozen=True)
class RunConfig:
    preset: Optional[str] = None
    omega_r: float = 9.0
    alpha: float = 0.01
    beta_diss: float = 0.01
    beta_a: float = 0.05
    beta_b: float = 0.05
    beta_c: Optional[float] = None
    g0: float = 1.0
    d0: float = 2.0
    delta_phi: Optional[float] = None  # degrees
    d: Optional[float] = None  # mm
    third_enabled: bool = False
    j1: Optional[float] = None
    j2: Optional[float] = None
    omega_c_slope: Optional[float] = None
    omega_c_intercept: Optional[float] = None
    gamma: float = 0.1
    theta_a: float = 0.0  # degrees
    theta_b: float = 0.0
    theta_c: float = 0.0

    @property
    def line_coupling_c(self) -> float:
        return 0.5 * self.beta_a if self.beta_c is None else self.beta_c

    def drive(self) -> DriveSpec:
        return DriveSpec(*(math.radians(t) for t in (self.theta_a, self.theta_b, self.theta_c)))

    def third(self) -> Optional[ThirdModeParams]:
        if not self.third_enabled:
            return None
        return ThirdModeParams(self.j1, self.j2, self.omega_c_slope, self.omega_c_intercept, self.gamma)

    def system(self, d: Optional[float] = None, delta_phi: Optional[float] = None) -> ModeSystem:
        """The mode system at spacing ``d`` (mm) and orientation ``delta_phi`` (degrees)."""
        d = self.d if d is None else d
        phi = self.delta_phi if delta_phi is None else delta_phi
        geometry = ChiralGeometry(math.radians(phi), d, self.d0)
        coupling = CouplingParams(geometry, self.g0, self.third())
        system = ModeSystem(
            ResonatorMode(self.omega_r, self.alpha, self.beta_a),
            ResonatorMode(self.omega_r, self.beta_diss, self.beta_b),
            coupling,
            ResonatorMode(self.omega_r, self.gamma, self.line_coupling_c) if self.third_enabled else None,
        )
        return system.at_distance(d)

    def describe(self) -> list[str]:
        """``key=value`` lines for output file headers."""
        out = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "beta_c":
                value = self.line_coupling_c
            out.append(f"{f.name}={value}")
        return out


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _check_type(key, value):
    if key == "preset":
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {type(value).__name__}")
        return value
    if key == "third_enabled":
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if value is None and key == "beta_c":
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite, got {value!r}")
    return float(value)


def preset_fields(name: str) -> dict:
    try:
        p = get_preset(name)
    except KeyError as exc:
        raise ConfigError(f"preset: {exc.args[0]}") from None
    return {
        "preset": p.name,
        "delta_phi": p.delta_phi_deg,
        "d": p.distances[0],
        "j1": p.j1,
        "j2": p.j2,
        "omega_c_slope": p.omega_c_slope,
        "omega_c_intercept": p.omega_c_intercept,
    }


def resolve_config(mapping: dict, overrides: Optional[dict] = None,
                   required=GEOMETRY_KEYS) -> RunConfig:
    """Expand the preset, apply ``mapping`` then ``overrides``, validate.

    ``required`` lists keys that must end up set (besides the third-mode keys,
    which are required whenever the third mode is enabled).
    """
    if not isinstance(mapping, dict):
        raise ConfigError("config must be a JSON object")
    merged: dict = {}
    layers = [mapping, overrides or {}]
    for layer in layers:
        for key, value in layer.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{key}: unknown config key")
            merged[key] = _check_type(key, value)
    values = dict(DEFAULTS)
    preset = merged.get("preset")
    if preset is not None:
        values.update(preset_fields(preset))
    values.update(merged)
    missing = [k for k in required if values.get(k) is None]
    if values.get("third_enabled"):
        missing += [k for k in THIRD_KEYS if values.get(k) is None]
    if missing:
        raise ConfigError(
            "missing required keys: " + ", ".join(missing)
            + " (set them or choose a preset from " + "/".join(PRESETS) + ")"
        )
    cfg = RunConfig(**values)
    _validate(cfg, required)
    return cfg


def _validate(cfg: RunConfig, required) -> None:
    positive = ("omega_r", "g0", "d0")
    nonneg = ("alpha", "beta_diss", "beta_a", "beta_b", "gamma")
    for key in positive:
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"{key}: must be > 0, got {getattr(cfg, key)!r}")
    for key in nonneg:
        if not getattr(cfg, key) >= 0:
            raise ConfigError(f"{key}: must be >= 0, got {getattr(cfg, key)!r}")
    if not cfg.line_coupling_c >= 0:
        raise ConfigError(f"beta_c: must be >= 0, got {cfg.beta_c!r}")
    if cfg.d is not None and not cfg.d >= 0:
        raise ConfigError(f"d: must be >= 0 mm, got {cfg.d!r}")
    if cfg.third_enabled:
        for key in ("j1", "j2"):
            if not getattr(cfg, key) >= 0:
                raise ConfigError(f"{key}: must be >= 0, got {getattr(cfg, key)!r}")
        if cfg.d is not None:
            w = cfg.omega_c_slope * cfg.d + cfg.omega_c_intercept
            if not w > 0:
                raise ConfigError(f"omega_c_intercept: third-mode frequency {w!r} GHz is not positive at d={cfg.d}")


def load_config(path, overrides: Optional[dict] = None, required=GEOMETRY_KEYS) -> RunConfig:
    """Read a JSON config file and resolve it (see :func:`resolve_config`)."""
    with open(path, encoding="utf-8") as fh:
        try:
            mapping = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return resolve_config(mapping, overrides, required)


# -- output helpers ----------------------------------------------------------

def write_atomic(path, data) -> None:
    """Write ``data`` (str or bytes) to ``path`` via a temporary file and rename."""
    if isinstance(data, str):
        data = data.encode("ascii")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected FMIN:FMAX, got {text!r}") from None
    return lo, hi


# -- subcommands -------------------------------------------------------------

def cmd_spectrum(args, cfg: RunConfig) -> None:
    points = spectrum(cfg.system(), cfg.drive(), args.fmin, args.fmax, args.points)
    data = ingest.MeasuredSpectrum(tuple((p.frequency, p.s21) for p in points), "model")
    _emit(args, ingest.serialize_spectrum(data, comments=cfg.describe()))


def cmd_eigen(args, cfg: RunConfig) -> None:
    lines = [f"# {c}\n" for c in cfg.describe()] + ["re_ghz,im_ghz\n"]
    for z in eigenfrequencies(cfg.system()):
        lines.append(f"{sweep.fmt(z.re)},{sweep.fmt(z.im)}\n")
    _emit(args, "".join(lines))


def _grid(args, cfg: RunConfig) -> sweep.SpectrumGrid:
    return sweep.grid_sweep(
        cfg.system(d=args.dmin), cfg.drive(),
        (args.fmin, args.fmax, args.points), (args.dmin, args.dmax, args.dsteps),
        workers=args.workers,
    )


def cmd_sweep(args, cfg: RunConfig) -> None:
    grid = _grid(args, cfg)
    if args.heatmap:
        write_atomic(args.heatmap, sweep.heatmap_pgm(grid))
    _emit(args, sweep.grid_to_csv(grid, comments=cfg.describe()))


def cmd_phasediagram(args, cfg: RunConfig) -> None:
    diagram = sweep.phase_diagram(
        cfg.g0, cfg.d0, (args.dmin, args.dmax, args.dsteps),
        (math.radians(args.phimin), math.radians(args.phimax), args.phisteps),
    )
    _emit(args, sweep.phase_diagram_to_csv(diagram, comments=[f"g0={cfg.g0}", f"d0={cfg.d0}"]))


def cmd_peaks(args, cfg: RunConfig) -> None:
    lo, hi = args.window
    if args.input:
        measured = ingest.load_spectrum(args.input)
        d = cfg.d if cfg.d is not None else 0.0
        values = [[20.0 * math.log10(abs(s)) if s != 0 else -math.inf for s in measured.s21]]
        grid = sweep.SpectrumGrid(measured.frequencies, [d], values)
        comments = [f"source={measured.source}", f"d={d}"]
        third_line = None
    else:
        if cfg.delta_phi is None:
            raise ConfigError("missing required keys: delta_phi (needed for a model sweep; "
                              "pass --input to analyse a measured spectrum)")
        grid = _grid(args, cfg)
        comments = cfg.describe()
        third = cfg.third()
        third_line = None if third is None else (lambda d: omega_c(third, d))
    peaks = sweep.find_peaks(grid, lo, hi, args.prominence_db, third_line)
    _emit(args, sweep.peaks_to_csv(peaks, comments=comments))


def _read_peaks(path) -> sweep.PeakSet:
    with open(path, "rb") as fh:
        return sweep.peaks_from_csv(fh.read())


def cmd_fit_line(args, cfg) -> None:
    peaks = _read_peaks(args.input)
    pts = [(p.d, p.f) for p in peaks if p.branch == args.branch]
    _emit(args, calibration.fit_line(pts).report())


def cmd_fit_decay(args, cfg) -> None:
    peaks = _read_peaks(args.input)
    splits = []
    for d, row in sorted(peaks.rows().items()):
        by = {p.branch: p.f for p in row}
        if "lower" in by and "upper" in by:
            splits.append((d, by["upper"] - by["lower"]))
    _emit(args, calibration.fit_decay(splits).report())


def cmd_fit_j(args, cfg: RunConfig) -> None:
    data = {}
    for spec in args.input:
        deg, sep, path = spec.partition(":")
        if not sep:
            raise ConfigError(f"--input: expected DEGREES:PATH, got {spec!r}")
        try:
            phi = math.radians(float(deg))
        except ValueError:
            raise ConfigError(f"--input: bad angle {deg!r}") from None
        data[phi] = [(p.d, p.f) for p in _read_peaks(path).branch(args.branch)]
    base = dataclasses.replace(
        cfg,
        third_enabled=True,
        delta_phi=cfg.delta_phi if cfg.delta_phi is not None else 0.0,
        d=cfg.d if cfg.d is not None else 0.0,
        j1=0.0, j2=0.0,
    )
    fit = calibration.fit_j_parameters(data, base.system(), j_max=args.j_max)
    _emit(args, fit.report())


def cmd_ingest(args, cfg) -> None:
    measured = ingest.load_spectrum(args.input)
    _emit(args, ingest.serialize_spectrum(measured, comments=[f"source={measured.source}"]))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


_DESCRIPTION = "Transmission, eigenmode and calibration tools for coupled chiral resonators."
_EPILOG = (
    "model defaults (GHz unless noted): omega_r=9.0 alpha=0.01 beta_diss=0.01 "
    "beta_a=0.05 beta_b=0.05 beta_c=0.5*beta_a g0=1.0 d0=2.0mm gamma=0.1; "
    "presets P/Q/R/S set delta_phi=0/90/180/270 deg, d, J1/J2 and the third-mode line."
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON object of run-config fields")
    common.add_argument("--preset", choices=sorted(PRESETS), help="device configuration")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--d", type=float, help="inter-resonator spacing in mm")
    common.add_argument("--delta-phi", type=float, help="relative orientation in degrees")
    common.add_argument("--third", action="store_true", default=None, help="enable the third mode")
    common.add_argument("--theta-a", type=float, help="drive phase at mode A, degrees")
    common.add_argument("--theta-b", type=float, help="drive phase at mode B, degrees")
    common.add_argument("--theta-c", type=float, help="drive phase at mode C, degrees")

    freq = argparse.ArgumentParser(add_help=False)
    freq.add_argument("--fmin", type=float, default=5.0)
    freq.add_argument("--fmax", type=float, default=10.0)
    freq.add_argument("--points", type=int, default=2001)

    dist = argparse.ArgumentParser(add_help=False)
    dist.add_argument("--dmin", type=float, default=0.0)
    dist.add_argument("--dmax", type=float, default=10.0)
    dist.add_argument("--dsteps", type=int, default=100, help="number of distance points")
    dist.add_argument("--workers", type=int, default=min(4, os.cpu_count() or 1))

    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="chiraltunnel", description=_DESCRIPTION, epilog=_EPILOG,
                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", parents=[common], formatter_class=fmt, epilog=_EPILOG,
                       help="complex S21 over a frequency range")
    p.add_argument("--fmin", type=float, default=8.0)
    p.add_argument("--fmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=2001)
    p.set_defaults(func=cmd_spectrum, required=GEOMETRY_KEYS)

    p = sub.add_parser("eigen", parents=[common], formatter_class=fmt, epilog=_EPILOG,
                       help="hybridized eigenfrequencies")
    p.set_defaults(func=cmd_eigen, required=GEOMETRY_KEYS)

    p = sub.add_parser("sweep", parents=[common, freq, dist], formatter_class=fmt, epilog=_EPILOG,
                       help="|S21| frequency-distance grid")
    p.add_argument("--heatmap", help="also write a binary PGM heatmap")
    p.set_defaults(func=cmd_sweep, required=("delta_phi",))

    p = sub.add_parser("phasediagram", parents=[common], formatter_class=fmt, epilog=_EPILOG,
                       help="coupling over distance and orientation")
    p.add_argument("--dmin", type=float, default=0.0)
    p.add_argument("--dmax", type=float, default=10.0)
    p.add_argument("--dsteps", type=int, default=100, help="number of distance points")
    p.add_argument("--phimin", type=float, default=0.0, help="degrees")
    p.add_argument("--phimax", type=float, default=360.0, help="degrees")
    p.add_argument("--phisteps", type=int, default=361, help="number of orientation points")
    p.set_defaults(func=cmd_phasediagram, required=())

    p = sub.add_parser("peaks", parents=[common, freq, dist], formatter_class=fmt, epilog=_EPILOG,
                       help="resonance peaks of a model sweep or a measured spectrum")
    p.add_argument("--input", help="measured spectrum (.s2p or CSV) instead of a model sweep")
    p.add_argument("--window", type=_window, default=(5.0, 10.0), help="FMIN:FMAX in GHz")
    p.add_argument("--prominence-db", type=float, default=1.0)
    p.set_defaults(func=cmd_peaks, required=())

    p = sub.add_parser("fit-line", parents=[common], formatter_class=fmt,
                       help="linear regression of one peak branch against distance")
    p.add_argument("--input", required=True, help="peak CSV")
    p.add_argument("--branch", default="third", choices=sweep.BRANCHES)
    p.set_defaults(func=cmd_fit_line, required=())

    p = sub.add_parser("fit-decay", parents=[common], formatter_class=fmt,
                       help="decay length from the upper/lower splitting")
    p.add_argument("--input", required=True, help="peak CSV")
    p.set_defaults(func=cmd_fit_decay, required=())

    p = sub.add_parser("fit-j", parents=[common], formatter_class=fmt, epilog=_EPILOG,
                       help="third-mode couplings J1, J2 from third-branch peaks")
    p.add_argument("--input", action="append", required=True, metavar="DEG:PATH",
                   help="peak CSV for orientation DEG (repeat per configuration)")
    p.add_argument("--branch", default="third", choices=sweep.BRANCHES)
    p.add_argument("--j-max", type=float, default=0.2)
    p.set_defaults(func=cmd_fit_j, required=())

    p = sub.add_parser("ingest", parents=[common], formatter_class=fmt,
                       help="convert a Touchstone or CSV spectrum to the RI CSV layout")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_ingest, required=())
    return parser


def _overrides(args) -> dict:
    out = {}
    for flag, key in (("preset", "preset"), ("d", "d"), ("delta_phi", "delta_phi"),
                      ("theta_a", "theta_a"), ("theta_b", "theta_b"), ("theta_c", "theta_c")):
        value = getattr(args, flag, None)
        if value is not None:
            out[key] = value
    if getattr(args, "third", None):
        out["third_enabled"] = True
    return out


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, _overrides(args), args.required)
        else:
            cfg = resolve_config({}, _overrides(args), args.required)
        args.func(args, cfg)
    except (ConfigError, ParseError, FitError, DegenerateSystemError, ValueError) as exc:
        print(f"chiraltunnel {args.command}: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"chiraltunnel {args.command}: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
