"""Directions, angular grids and the five-port far-field model.

Every port pattern is a complex voltage gain in a common (theta, phi)
spherical frame: theta from +z, phi from +x, both in degrees at the API
boundary. The analytic surrogates are low-order azimuthal harmonics:

=====  =====================================  ============
port   field                                  mode
=====  =====================================  ============
P1     cos(theta/2) * cos(phi)                TM11, m=1
P2     cos(theta/2) * sin(phi)                TM11, m=1
P3     sin(theta)                             monopole, m=0
P4     sin(theta) * exp(+2j*phi)              TM21, m=2
P5     sin(theta) * exp(-2j*phi)              TM21, m=2
=====  =====================================  ============

P4/P5 can also be switched to standing harmonics (cos 2phi, -sin 2phi).
"""

from __future__ import annotations

import cmath
import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional

import numpy as np

from .errors import InvalidGridError, PatternSchemaError


class PortId(enum.Enum):
    P1 = 1
    P2 = 2
    P3 = 3
    P4 = 4
    P5 = 5

    @classmethod
    def parse(cls, name: str) -> "PortId":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown port {name!r}") from None


PORTS = tuple(PortId)
TRIO = (PortId.P3, PortId.P4, PortId.P5)


@dataclass(frozen=True)
class PortInfo:
    azimuthal_order: int
    harmonic_kind: str  # "standing" | "traveling"
    elevation_taper: str  # "broadside" | "conical"
    efficiency: float


DEFAULT_EFFICIENCY = {
    PortId.P1: 0.30,
    PortId.P2: 0.30,
    PortId.P3: 0.55,
    PortId.P4: 0.15,
    PortId.P5: 0.15,
}


def port_table(p45_kind: str = "traveling", efficiencies: Optional[Mapping[PortId, float]] = None):
    """Per-port metadata for the surrogate model."""
    if p45_kind not in ("traveling", "standing"):
        raise ValueError(f"p45_kind must be 'traveling' or 'standing', got {p45_kind!r}")
    eff = dict(DEFAULT_EFFICIENCY)
    if efficiencies:
        eff.update(efficiencies)
    for port, e in eff.items():
        if not 0.0 < e <= 1.0:
            raise ValueError(f"efficiency of {port.name} must lie in (0, 1], got {e}")
    return {
        PortId.P1: PortInfo(1, "standing", "broadside", eff[PortId.P1]),
        PortId.P2: PortInfo(1, "standing", "broadside", eff[PortId.P2]),
        PortId.P3: PortInfo(0, "standing", "conical", eff[PortId.P3]),
        PortId.P4: PortInfo(2, p45_kind, "conical", eff[PortId.P4]),
        PortId.P5: PortInfo(2, p45_kind, "conical", eff[PortId.P5]),
    }


@dataclass(frozen=True)
class Direction:
    """Look direction. ``phi_deg`` is wrapped into [0, 360) on construction."""

    theta_deg: float
    phi_deg: float = 0.0

    def __post_init__(self):
        theta = float(self.theta_deg)
        if not (math.isfinite(theta) and 0.0 <= theta <= 180.0):
            raise ValueError(f"theta_deg must lie in [0, 180], got {self.theta_deg}")
        phi = float(self.phi_deg)
        if not math.isfinite(phi):
            raise ValueError(f"phi_deg must be finite, got {self.phi_deg}")
        phi = phi % 360.0
        if phi >= 360.0:  # -1e-17 % 360 == 360.0
            phi = 0.0
        object.__setattr__(self, "theta_deg", theta)
        object.__setattr__(self, "phi_deg", phi)

    @classmethod
    def azimuth(cls, phi_deg: float) -> "Direction":
        return cls(90.0, phi_deg)

    @classmethod
    def in_plane(cls, signed_theta_deg: float, plane_phi_deg: float) -> "Direction":
        """Direction at a signed elevation angle inside the vertical plane ``plane_phi_deg``.

        Negative angles fold onto the opposite half-plane (phi + 180).
        """
        if signed_theta_deg < 0:
            return cls(-signed_theta_deg, plane_phi_deg + 180.0)
        return cls(signed_theta_deg, plane_phi_deg)

    def rotated(self, dphi_deg: float) -> "Direction":
        return Direction(self.theta_deg, self.phi_deg + dphi_deg)

    def mirrored(self) -> "Direction":
        """Same elevation, opposite azimuth."""
        return self.rotated(180.0)


def _divides(step: float, span: float) -> bool:
    if not (math.isfinite(step) and step > 0):
        return False
    n = span / step
    return abs(n - round(n)) < 1e-9 and round(n) >= 1


@dataclass(frozen=True)
class AngularGrid:
    theta_step_deg: float = 1.0
    phi_step_deg: float = 1.0

    def __post_init__(self):
        if not _divides(self.theta_step_deg, 180.0):
            raise InvalidGridError(f"theta step {self.theta_step_deg} does not divide 180")
        if not _divides(self.phi_step_deg, 360.0):
            raise InvalidGridError(f"phi step {self.phi_step_deg} does not divide 360")

    @property
    def n_theta(self) -> int:
        return int(round(180.0 / self.theta_step_deg)) + 1

    @property
    def n_phi(self) -> int:
        return int(round(360.0 / self.phi_step_deg))

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    @property
    def thetas(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.theta_step_deg

    @property
    def phis(self) -> np.ndarray:
        return np.arange(self.n_phi) * self.phi_step_deg

    def mesh(self):
        """(theta, phi) arrays of shape ``self.shape``, degrees."""
        return np.meshgrid(self.thetas, self.phis, indexing="ij")


def mode_field(port: PortId, theta_deg, phi_deg, p45_kind: str = "traveling"):
    """Unit-peak surrogate pattern of ``port``; broadcasts over array inputs."""
    th = np.deg2rad(np.asarray(theta_deg, dtype=float))
    ph = np.deg2rad(np.asarray(phi_deg, dtype=float))
    if port is PortId.P1:
        out = np.cos(th / 2) * np.cos(ph)
    elif port is PortId.P2:
        out = np.cos(th / 2) * np.sin(ph)
    elif port is PortId.P3:
        out = np.sin(th) * np.ones_like(ph)
    elif port is PortId.P4:
        out = np.sin(th) * (np.exp(2j * ph) if p45_kind == "traveling" else np.cos(2 * ph))
    elif port is PortId.P5:
        out = np.sin(th) * (np.exp(-2j * ph) if p45_kind == "traveling" else -np.sin(2 * ph))
    else:
        raise ValueError(f"unknown port {port!r}")
    return np.asarray(out, dtype=complex)


def eval_mode(
    port: PortId,
    direction: Direction,
    efficiency_scaling: bool = False,
    p45_kind: str = "traveling",
    efficiencies: Optional[Mapping[PortId, float]] = None,
) -> complex:
    value = complex(mode_field(port, direction.theta_deg, direction.phi_deg, p45_kind))
    if efficiency_scaling:
        eff = (efficiencies or DEFAULT_EFFICIENCY).get(port, DEFAULT_EFFICIENCY[port])
        value *= math.sqrt(eff)
    return value


class PatternSet:
    """Complex far-field patterns of all five ports.

    Build with :func:`analytic_set`, :func:`sample_pattern_set`,
    :func:`load_pattern_csv` or :meth:`from_arrays`; treat as immutable.
    Grid-sourced sets are interpolated bilinearly (phi periodic) between nodes.
    """

    def __init__(
        self,
        source: str,
        *,
        grid: Optional[AngularGrid] = None,
        values: Optional[Mapping[PortId, np.ndarray]] = None,
        efficiency_scaling: bool = False,
        p45_kind: str = "traveling",
        efficiencies: Optional[Mapping[PortId, float]] = None,
    ):
        if source not in ("analytic", "grid"):
            raise ValueError(f"source must be 'analytic' or 'grid', got {source!r}")
        self.source = source
        self.efficiency_scaling = bool(efficiency_scaling)
        self.p45_kind = p45_kind
        self.info = port_table(p45_kind, efficiencies)
        self.grid = grid
        self._values: Dict[PortId, np.ndarray] = {}
        if source == "grid":
            if grid is None or values is None:
                raise ValueError("grid source needs both grid and values")
            missing = [p.name for p in PORTS if p not in values]
            if missing:
                raise ValueError(f"missing ports: {', '.join(missing)}")
            for port in PORTS:
                arr = np.array(values[port], dtype=complex)
                if arr.shape != grid.shape:
                    raise InvalidGridError(f"{port.name} samples have shape {arr.shape}, expected {grid.shape}")
                if not np.all(np.isfinite(arr)):
                    raise ValueError(f"{port.name} samples contain non-finite values")
                arr.setflags(write=False)
                self._values[port] = arr
        self._peaks: Dict[PortId, float] = {}

    @classmethod
    def from_arrays(cls, grid: AngularGrid, values: Mapping[PortId, np.ndarray], **kw) -> "PatternSet":
        return cls("grid", grid=grid, values=values, **kw)

    @property
    def ports(self):
        return PORTS

    def _scale(self, port: PortId) -> float:
        return math.sqrt(self.info[port].efficiency) if self.efficiency_scaling else 1.0

    def field(self, port: PortId, theta_deg, phi_deg) -> np.ndarray:
        """Vectorized complex gain of ``port``; angles in degrees."""
        if self.source == "analytic":
            return mode_field(port, theta_deg, phi_deg, self.p45_kind) * self._scale(port)
        return self._interp(self._values[port], theta_deg, phi_deg)

    def gain(self, port: PortId, direction: Direction) -> complex:
        return complex(self.field(port, direction.theta_deg, direction.phi_deg))

    def gains(self, direction: Direction, ports: Iterable[PortId] = PORTS) -> np.ndarray:
        if self.source != "analytic":
            return np.array([self.gain(p, direction) for p in ports])
        # scalar fast path; numpy per-port calls dominate single-direction use
        th = math.radians(direction.theta_deg)
        ph = math.radians(direction.phi_deg)
        c2, s = math.cos(th / 2), math.sin(th)
        if self.p45_kind == "traveling":
            tm21 = (s * cmath.exp(2j * ph), s * cmath.exp(-2j * ph))
        else:
            tm21 = (s * math.cos(2 * ph), -s * math.sin(2 * ph))
        vals = {
            PortId.P1: c2 * math.cos(ph),
            PortId.P2: c2 * math.sin(ph),
            PortId.P3: s,
            PortId.P4: tm21[0],
            PortId.P5: tm21[1],
        }
        return np.array([vals[p] * self._scale(p) for p in ports], dtype=complex)

    def samples(self, port: PortId, grid: Optional[AngularGrid] = None) -> np.ndarray:
        """Pattern of ``port`` sampled on ``grid`` (default: the set's own grid)."""
        grid = grid or self.grid or AngularGrid()
        if self.source == "grid" and grid == self.grid:
            return self._values[port]
        th, ph = grid.mesh()
        return self.field(port, th, ph)

    def peak(self, port: PortId) -> float:
        """Peak magnitude of ``port``; the reference for relative null thresholds."""
        if port not in self._peaks:
            if self.source == "analytic":
                self._peaks[port] = self._scale(port)
            else:
                self._peaks[port] = float(np.max(np.abs(self._values[port])))
        return self._peaks[port]

    def _interp(self, table: np.ndarray, theta_deg, phi_deg) -> np.ndarray:
        g = self.grid
        th = np.clip(np.asarray(theta_deg, dtype=float), 0.0, 180.0) / g.theta_step_deg
        ph = np.mod(np.asarray(phi_deg, dtype=float), 360.0) / g.phi_step_deg
        i0 = np.minimum(np.floor(th).astype(int), g.n_theta - 2) if g.n_theta > 1 else np.zeros_like(th, int)
        j0 = np.floor(ph).astype(int) % g.n_phi
        ti = th - i0
        tj = ph - np.floor(ph)
        j1 = (j0 + 1) % g.n_phi
        i1 = np.minimum(i0 + 1, g.n_theta - 1)
        out = (
            table[i0, j0] * (1 - ti) * (1 - tj)
            + table[i0, j1] * (1 - ti) * tj
            + table[i1, j0] * ti * (1 - tj)
            + table[i1, j1] * ti * tj
        )
        return np.asarray(out, dtype=complex)

    def __repr__(self):
        grid = f", grid={self.grid}" if self.grid else ""
        return f"PatternSet(source={self.source!r}, efficiency_scaling={self.efficiency_scaling}{grid})"


def analytic_set(
    efficiency_scaling: bool = False,
    p45_kind: str = "traveling",
    efficiencies: Optional[Mapping[PortId, float]] = None,
) -> PatternSet:
    return PatternSet(
        "analytic", efficiency_scaling=efficiency_scaling, p45_kind=p45_kind, efficiencies=efficiencies
    )


def sample_pattern_set(
    grid: AngularGrid = AngularGrid(),
    efficiency_scaling: bool = False,
    p45_kind: str = "traveling",
    efficiencies: Optional[Mapping[PortId, float]] = None,
) -> PatternSet:
    """Sample the analytic surrogates onto ``grid``."""
    if not isinstance(grid, AngularGrid):
        grid = AngularGrid(*grid)
    model = analytic_set(efficiency_scaling, p45_kind, efficiencies)
    th, ph = grid.mesh()
    values = {p: model.field(p, th, ph) for p in PORTS}
    return PatternSet(
        "grid",
        grid=grid,
        values=values,
        efficiency_scaling=efficiency_scaling,
        p45_kind=p45_kind,
        efficiencies=efficiencies,
    )


PATTERN_CSV_HEADER = ["port", "theta_deg", "phi_deg", "re", "im"]


def export_pattern_csv(pset: PatternSet, path, grid: Optional[AngularGrid] = None) -> Path:
    """Write ``pset`` in the pattern CSV schema; analytic sets are sampled on ``grid``."""
    grid = grid or pset.grid or AngularGrid()
    path = Path(path)
    thetas, phis = grid.thetas, grid.phis
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PATTERN_CSV_HEADER)
        for port in PORTS:
            vals = pset.samples(port, grid)
            for i, th in enumerate(thetas):
                for j, ph in enumerate(phis):
                    v = vals[i, j]
                    w.writerow([port.name, repr(float(th)), repr(float(ph)), repr(float(v.real)), repr(float(v.imag))])
    return path


def _grid_from_axis(values, span, name, row):
    if len(values) < 2:
        raise PatternSchemaError(f"{name} axis needs at least two values", row=row)
    steps = np.diff(values)
    step = float(steps[0])
    if not np.allclose(steps, step, rtol=0, atol=1e-9) or abs(values[0]) > 1e-9:
        raise PatternSchemaError(f"{name} values are not a regular grid starting at 0", row=row)
    return step


def load_pattern_csv(path, efficiency_scaling: bool = False, p45_kind: str = "traveling") -> PatternSet:
    """Read a pattern CSV (see :data:`PATTERN_CSV_HEADER`) into a grid :class:`PatternSet`.

    Raises :class:`PatternSchemaError` naming the offending data row (1-based,
    header excluded) for malformed, non-finite, out-of-order or missing data.
    """
    rows: Dict[PortId, list] = {p: [] for p in PORTS}
    first_row: Dict[PortId, int] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != PATTERN_CSV_HEADER:
            raise PatternSchemaError(f"header must be {','.join(PATTERN_CSV_HEADER)}, got {header}")
        last_key = None
        for idx, rec in enumerate(reader, start=1):
            if not rec:
                continue
            if len(rec) != 5:
                raise PatternSchemaError(f"expected 5 fields, got {len(rec)}", row=idx)
            try:
                port = PortId.parse(rec[0])
            except ValueError as exc:
                raise PatternSchemaError(str(exc), row=idx) from None
            try:
                th, ph, re, im = (float(x) for x in rec[1:])
            except ValueError:
                raise PatternSchemaError("non-numeric value", row=idx) from None
            for name, v in zip(PATTERN_CSV_HEADER[1:], (th, ph, re, im)):
                if not math.isfinite(v):
                    raise PatternSchemaError(f"non-finite {name}", row=idx)
            key = (port.value, th, ph)
            if last_key is not None and key <= last_key:
                raise PatternSchemaError("rows not sorted by (port, theta, phi)", row=idx)
            last_key = key
            first_row.setdefault(port, idx)
            rows[port].append((th, ph, complex(re, im), idx))

    missing = [p.name for p in PORTS if not rows[p]]
    if missing:
        raise PatternSchemaError(f"missing port(s) {', '.join(missing)}")

    ref = rows[PortId.P1]
    thetas = np.unique([r[0] for r in ref])
    phis = np.unique([r[1] for r in ref])
    row0 = first_row[PortId.P1]
    dth = _grid_from_axis(thetas, 180.0, "theta", row0)
    dph = _grid_from_axis(phis, 360.0, "phi", row0)
    try:
        grid = AngularGrid(dth, dph)
    except InvalidGridError as exc:
        raise PatternSchemaError(str(exc), row=row0) from None
    if len(thetas) != grid.n_theta or len(phis) != grid.n_phi:
        raise PatternSchemaError("grid does not cover theta 0..180 and phi 0..360-step", row=row0)
    expected_nodes = grid.n_theta * grid.n_phi

    values = {}
    th_expect, ph_expect = grid.mesh()
    th_expect, ph_expect = th_expect.ravel(), ph_expect.ravel()
    for port in PORTS:
        recs = rows[port]
        for k, (th, ph, _, idx) in enumerate(recs):
            if k >= expected_nodes or abs(th - th_expect[k]) > 1e-9 or abs(ph - ph_expect[k]) > 1e-9:
                raise PatternSchemaError(f"{port.name} grid inconsistent with P1 grid", row=idx)
        if len(recs) != expected_nodes:
            raise PatternSchemaError(
                f"{port.name} has {len(recs)} rows, expected {expected_nodes}", row=recs[-1][3]
            )
        values[port] = np.array([r[2] for r in recs]).reshape(grid.shape)
    return PatternSet(
        "grid", grid=grid, values=values, efficiency_scaling=efficiency_scaling, p45_kind=p45_kind
    )
