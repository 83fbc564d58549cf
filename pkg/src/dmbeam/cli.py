"""Command-line front end: ``dmbeam {patterns,steer,dm,report}``.

Run settings come from an INI-style file with ``[pattern]``, ``[steer]`` and
``[dm]`` sections (see :class:`RunConfig`); ``--set section.key=value``
overrides single keys. Exit status: 0 success, 2 configuration error,
3 simulation/runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import ConfigError, DmBeamError
from .io import (
    is_periodic,
    read_beam_cut_csv,
    read_ber_csv,
    read_manifest,
    sniff_kind,
    write_beam_cut_csv,
    write_ber_csv,
    write_manifest,
)
from .link import LinkConfig, ber_beamwidth, ber_sweep, low_ber_lobes
from .patterns import PORTS, AngularGrid, Direction, export_pattern_csv, load_pattern_csv, sample_pattern_set
from .synthesis import (
    beam_cut,
    beam_report,
    enhance_unidirectional,
    steer_azimuth,
    steer_elevation,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


@dataclass
class PatternSection:
    theta_step: float = 1.0
    phi_step: float = 1.0
    efficiency_scaling: bool = False
    p45_kind: str = "traveling"


@dataclass
class SteerSection:
    azimuth_phi0: Tuple[float, ...] = (0.0, 45.0, 90.0, 135.0)
    enhance_phi0: Tuple[float, ...] = (90.0, 180.0)
    ratios: Tuple[float, ...] = (0.0, 0.25, 0.5, 0.6, 0.7, 1.0)
    elevation: Tuple[str, ...] = ("xz+", "xz-", "yz+", "yz-")
    threshold_db: float = -3.0
    cut_step: float = 1.0


@dataclass
class DmSection:
    snr_db: float = 12.0
    n_symbols: int = 100_000
    an_ratio: float = 1.0
    sweep_plane: str = "azimuth"
    bobs: Tuple[float, ...] = (0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0)
    bob_theta: float = 90.0
    cut_phi: float = 0.0
    angle_step: float = 1.0
    beam: str = "auto"
    ratio: float = 0.6
    snr_convention: str = "es"
    symbol_split: str = "uniform"
    threshold: float = 1e-2
    workers: int = 1
    figure: str = "auto"


@dataclass
class RunConfig:
    pattern: PatternSection = field(default_factory=PatternSection)
    steer: SteerSection = field(default_factory=SteerSection)
    dm: DmSection = field(default_factory=DmSection)
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def grid(self) -> AngularGrid:
        return AngularGrid(self.pattern.theta_step, self.pattern.phi_step)

    def pattern_set(self):
        return sample_pattern_set(self.grid, self.pattern.efficiency_scaling, self.pattern.p45_kind)


_SECTIONS = {"pattern": PatternSection, "steer": SteerSection, "dm": DmSection}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(section: str, key: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() in _TRUE:
                return True
            if raw.lower() in _FALSE:
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if default and isinstance(default[0], float):
                return tuple(float(s) for s in items)
            return tuple(items)
        return raw
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def _apply(cfg: RunConfig, section: str, key: str, raw: str):
    if section not in _SECTIONS:
        raise ConfigError(f"unknown section [{section}]")
    obj = getattr(cfg, section)
    names = {f.name for f in dataclasses.fields(obj)}
    if key not in names:
        raise ConfigError(f"unknown key {key!r} in [{section}]")
    setattr(obj, key, _coerce(section, key, raw, getattr(obj, key)))


def load_run_config(path: Optional[Path] = None, overrides: Sequence[str] = (), seed: Optional[int] = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        for section in parser.sections():
            for key, raw in parser.items(section):
                _apply(cfg, section, key, raw)
    for item in overrides:
        m = re.fullmatch(r"\s*(\w+)\.(\w+)\s*=(.*)", item)
        if not m:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        _apply(cfg, m.group(1), m.group(2), m.group(3))
    if seed is not None:
        cfg.seed = seed
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    try:
        cfg.grid
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _manifest(command: str, cfg: RunConfig, files: List[dict], **extra) -> dict:
    return {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "files": files,
        **extra,
    }


def _entry(path: Path, out: Path, figure: str, kind: str) -> dict:
    return {"path": str(path.relative_to(out)), "figure": figure, "kind": kind}


def _angle_tag(a: float) -> str:
    return f"{a:07.3f}".replace(".", "p").rstrip("0").rstrip("p")


def cmd_patterns(cfg: RunConfig, out: Path, log=print) -> Path:
    """Full pattern grid plus per-port magnitude/phase azimuth cuts (theta = 90)."""
    pset = cfg.pattern_set()
    files = [_entry(export_pattern_csv(pset, out / "patterns_grid.csv"), out, "fig2a", "pattern")]
    angles = np.arange(0.0, 360.0, cfg.pattern.phi_step)
    for port in PORTS:
        vals = pset.field(port, np.full_like(angles, 90.0), angles)
        if not np.any(np.abs(vals) > 0):
            continue
        p = write_beam_cut_csv(angles, vals, out / f"patterns_cut_{port.name}.csv")
        files.append(_entry(p, out, "fig2a", "cut"))
    log(f"patterns: wrote {len(files)} files to {out}")
    return write_manifest(_manifest("patterns", cfg, files, figure="fig2a"), out / "patterns_manifest.json")


_REPORT_FIELDS = [
    "name",
    "figure",
    "peak_theta_deg",
    "peak_phi_deg",
    "peak_gain_db",
    "front_to_back_db",
    "beamwidth_deg",
    "directivity_dbi",
    "elevation_leakage_db",
]


def _parse_elevation(spec: str) -> Tuple[str, str]:
    m = re.fullmatch(r"(xz|yz)([+-])", spec.strip())
    if not m:
        raise ConfigError(f"elevation entries must look like 'xz+' or 'yz-', got {spec!r}")
    return m.group(1), m.group(2)


def cmd_steer(cfg: RunConfig, out: Path, log=print) -> Path:
    """Beam cuts and reports for azimuth, enhanced and elevation steering."""
    s = cfg.steer
    pset = cfg.pattern_set()
    jobs = []
    for phi0 in s.azimuth_phi0:
        jobs.append((f"azimuth_phi{_angle_tag(phi0)}", "fig4", steer_azimuth(pset, phi0), "azimuth", 0.0))
    for phi0 in s.enhance_phi0:
        fig = "fig6" if phi0 == 90 else "fig7" if phi0 == 180 else "fig6-7"
        for r in s.ratios:
            exc = enhance_unidirectional(pset, phi0, r)
            jobs.append((f"enhanced_phi{_angle_tag(phi0)}_r{r:.2f}", fig, exc, "azimuth", 0.0))
    for spec in s.elevation:
        plane, sign = _parse_elevation(spec)
        exc = steer_elevation(pset, plane, sign)
        name = f"elevation_{plane}{'plus' if sign == '+' else 'minus'}"
        jobs.append((name, "fig5", exc, "elevation", 0.0 if plane == "xz" else 90.0))

    files = []
    rows = []
    for name, fig, exc, plane, fixed in jobs:
        angles, vals = beam_cut(pset, exc, plane, s.cut_step, fixed)
        files.append(_entry(write_beam_cut_csv(angles, vals, out / f"steer_{name}.csv"), out, fig, "cut"))
        rep = beam_report(pset, exc, cfg.grid, s.threshold_db)
        rows.append(
            [
                name,
                fig,
                rep.peak_direction.theta_deg,
                rep.peak_direction.phi_deg,
                f"{rep.peak_gain_db:.6f}",
                f"{rep.front_to_back_db:.6f}",
                rep.beamwidth_deg,
                f"{rep.directivity_dbi:.6f}",
                f"{rep.elevation_leakage_db:.6f}",
            ]
        )
        log(
            f"{name:28s} peak=({rep.peak_direction.theta_deg:g},{rep.peak_direction.phi_deg:g}) "
            f"F/B={rep.front_to_back_db:6.2f} dB  D={rep.directivity_dbi:5.2f} dBi"
        )
    report = out / "steer_report.csv"
    with report.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_REPORT_FIELDS)
        w.writerows(rows)
    files.append(_entry(report, out, "fig4-7", "summary"))
    return write_manifest(_manifest("steer", cfg, files, figure="fig4-7"), out / "steer_manifest.json")


def _dm_figure(d: DmSection) -> str:
    if d.figure != "auto":
        return d.figure
    if d.sweep_plane == "elevation":
        return "fig10"
    return "fig8" if len(d.bobs) == 8 else "fig9"


def link_config(cfg: RunConfig, bob_angle: float) -> LinkConfig:
    d = cfg.dm
    bob = Direction(d.bob_theta, bob_angle) if d.sweep_plane == "azimuth" else Direction(bob_angle, d.cut_phi)
    return LinkConfig(
        snr_db=d.snr_db,
        n_symbols=d.n_symbols,
        an_ratio=d.an_ratio,
        bob=bob,
        sweep_plane=d.sweep_plane,
        cut_phi_deg=d.cut_phi,
        angle_step_deg=d.angle_step,
        seed=cfg.seed,
        beam=d.beam,
        ratio=d.ratio,
        snr_convention=d.snr_convention,
        symbol_split=d.symbol_split,
        efficiency_scaling=cfg.pattern.efficiency_scaling,
        p45_kind=cfg.pattern.p45_kind,
    )


_SUMMARY_FIELDS = ["bob_deg", "ber_at_bob", "min_ber", "beamwidth_deg", "n_lobes", "mirror_ber", "empty_beam", "file"]


def cmd_dm(cfg: RunConfig, out: Path, log=print) -> Path:
    """BER sweep per Bob angle, plus a beamwidth summary."""
    d = cfg.dm
    if not d.bobs:
        raise ConfigError("[dm] bobs is empty")
    try:
        configs = [link_config(cfg, b) for b in d.bobs]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    figure = _dm_figure(d)
    files = []
    rows = []
    for bob_angle, lc in zip(d.bobs, configs):
        curve = ber_sweep(lc, workers=d.workers)
        path = write_ber_csv(curve, out / f"dm_{d.sweep_plane}_bob{_angle_tag(bob_angle)}.csv")
        files.append(_entry(path, out, figure, "ber"))
        bw = ber_beamwidth(curve, d.threshold)
        lobes = low_ber_lobes(curve, d.threshold)
        mirror = curve.at((bob_angle + 180.0) % 360.0).ber if lc.periodic else ""
        rows.append(
            [
                bob_angle,
                repr(curve.at(bob_angle).ber),
                repr(float(curve.ber.min())),
                bw.width_deg,
                len(lobes),
                repr(mirror) if mirror != "" else "",
                int(bw.empty),
                path.name,
            ]
        )
        log(
            f"bob={bob_angle:6.1f}  BER@bob={curve.at(bob_angle).ber:.2e}  "
            f"BER<{d.threshold:g} width={bw.width_deg:g} deg  lobes={len(lobes)}  ({curve.wall_clock_s:.1f} s)"
        )
    summary = out / "dm_summary.csv"
    with summary.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_SUMMARY_FIELDS)
        w.writerows(rows)
    files.append(_entry(summary, out, figure, "summary"))
    return write_manifest(_manifest("dm", cfg, files, figure=figure), out / "dm_manifest.json")


def _figure_key(fig: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", fig)]


REPORT_HEADER = ["figure", "file", "kind", "metric", "status"]


def cmd_report(cfg: RunConfig, out: Path, source: Optional[Path] = None, log=print) -> Path:
    """Summarize every BER/cut/pattern CSV under ``source`` into ``report.csv``."""
    source = Path(source or out)
    if not source.is_dir():
        raise ConfigError(f"report input directory {source} does not exist")
    figures = {}
    for mpath in sorted(source.rglob("*_manifest.json")):
        try:
            man = read_manifest(mpath)
        except ValueError as exc:
            raise DmBeamError(f"{mpath}: unreadable manifest ({exc})") from None
        for f in man.get("files", []):
            figures[(mpath.parent / f["path"]).resolve()] = f.get("figure", "unknown")
    rows = []
    for path in sorted(source.rglob("*.csv")):
        if path.name == "report.csv":
            continue
        kind = sniff_kind(path)
        if kind == "unknown":
            continue
        fig = figures.get(path.resolve(), "unknown")
        if kind == "ber":
            records, seed = read_ber_csv(path)
            angles = [r.angle_deg for r in records]
            ber = [r.ber for r in records]
            bw = ber_beamwidth((angles, ber), 1e-2, periodic=is_periodic(angles))
            lobes = low_ber_lobes((angles, ber), 1e-2, periodic=is_periodic(angles))
            metric = f"min_ber={min(ber):.3g};width={bw.width_deg:g};lobes={len(lobes)};seed={seed}"
            status = "reproduced" if not bw.empty and min(ber) <= 1e-3 else "check"
        elif kind == "cut":
            a, mag, _ = read_beam_cut_csv(path)
            metric = f"peak_angle={a[int(np.argmax(mag))]:g}"
            status = "ok"
        else:
            pset = load_pattern_csv(path)
            metric = f"nodes={pset.grid.n_theta * pset.grid.n_phi}"
            status = "ok"
        rows.append([fig, str(path.relative_to(source)), kind, metric, status])
    if not rows:
        raise ConfigError(f"no run outputs (BER, beam-cut or pattern CSV files) found in {source}")
    rows.sort(key=lambda r: (_figure_key(r[0]), r[1]))
    out.mkdir(parents=True, exist_ok=True)
    report = out / "report.csv"
    with report.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        w.writerows(rows)
    for r in rows:
        log(f"{r[0]:8s} {r[2]:8s} {r[4]:10s} {r[1]}  {r[3]}")
    return report


def _add_common(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", type=Path, default=d(None), help="INI file with [pattern], [steer], [dm] sections")
    p.add_argument("--out", type=Path, default=d(Path("runs")), help="output directory (default: runs)")
    p.add_argument("--seed", type=int, default=d(None), help="RNG seed (unsigned 64-bit)")
    p.add_argument("--quiet", action="store_true", default=d(False), help="suppress progress output")
    p.add_argument(
        "--set", dest="overrides", action="append", default=d([]), metavar="SECTION.KEY=VALUE",
        help="override one config key; repeatable",
    )


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted both before and after the verb
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)
    parser = argparse.ArgumentParser(prog="dmbeam", description=__doc__.splitlines()[0])
    _add_common(parser, suppress=False)
    parser.add_argument("--version", action="version", version=f"dmbeam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("patterns", parents=[common], help="export port patterns (grid + azimuth cuts)")
    sub.add_parser("steer", parents=[common], help="synthesize steered beams and report metrics")
    sub.add_parser("dm", parents=[common], help="run directional-modulation BER sweeps")
    rep = sub.add_parser("report", parents=[common], help="summarize run outputs in a directory")
    rep.add_argument("source", nargs="?", type=Path, help="directory to scan (default: --out)")
    return parser


_COMMANDS = {"patterns": cmd_patterns, "steer": cmd_steer, "dm": cmd_dm}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    log = (lambda *a, **k: None) if args.quiet else print
    try:
        cfg = load_run_config(args.config, args.overrides, args.seed)
        out = args.out
        if args.command == "report":
            cmd_report(cfg, out, args.source, log=log)
            return EXIT_OK
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            print(f"error: cannot create output directory {out}: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        manifest = _COMMANDS[args.command](cfg, out, log=log)
        log(f"manifest: {manifest}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DmBeamError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
