"""Excitation synthesis by phase alignment, plus far-field beam metrics."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Tuple

import numpy as np

from .errors import DegeneratePatternError, NullPortError
from .patterns import PORTS, TRIO, AngularGrid, Direction, PatternSet, PortId

EPS_NULL = 1e-6
DEFAULT_RATIO = 0.6

# (plane, sign) -> (broadside port, TM21 port)
ELEVATION_PAIRS = {
    ("xz", "+"): (PortId.P1, PortId.P4),
    ("xz", "-"): (PortId.P1, PortId.P5),
    ("yz", "+"): (PortId.P2, PortId.P5),
    ("yz", "-"): (PortId.P2, PortId.P4),
}
_PLANE_PHI = {"xz": 0.0, "yz": 90.0}


@dataclass(frozen=True)
class Excitation:
    """Complex per-port weights. Ports not listed carry zero weight."""

    weights: Mapping[PortId, complex]
    meta: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = {PortId(p) if not isinstance(p, PortId) else p: complex(v) for p, v in self.weights.items()}
        if not w or all(v == 0 for v in w.values()):
            raise ValueError("excitation needs at least one nonzero weight")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def ports(self) -> Tuple[PortId, ...]:
        return tuple(p for p in PORTS if p in self.weights)

    def weight(self, port: PortId) -> complex:
        return self.weights.get(port, 0j)

    def vector(self) -> np.ndarray:
        """Weights as a length-5 array in port order P1..P5."""
        return np.array([self.weight(p) for p in PORTS])

    def scaled(self, c: complex) -> "Excitation":
        return Excitation({p: c * v for p, v in self.weights.items()}, self.meta)

    def __add__(self, other: "Excitation") -> "Excitation":
        ports = set(self.weights) | set(other.weights)
        return Excitation({p: self.weight(p) + other.weight(p) for p in ports})


def _check_null(pset: PatternSet, port: PortId, value: complex, eps_null: float):
    mag = abs(value)
    if mag < eps_null * pset.peak(port):
        raise NullPortError(port, mag)


def phase_align(
    pset: PatternSet,
    ports: Sequence[PortId],
    target: Direction,
    reference: PortId = PortId.P3,
    eps_null: float = EPS_NULL,
) -> Excitation:
    """Unit-magnitude weights that put every port in phase with ``reference`` at ``target``.

    ``w_n = exp(j (arg E_ref - arg E_n))`` so each term ``w_n E_n(target)``
    carries the reference port's phase and the magnitudes add coherently.
    """
    ports = tuple(ports)
    if reference not in ports:
        raise ValueError(f"reference port {reference.name} is not among {[p.name for p in ports]}")
    gains = {p: pset.gain(p, target) for p in ports}
    for p, g in gains.items():
        _check_null(pset, p, g, eps_null)
    ref_phase = cmath.phase(gains[reference])
    weights = {p: cmath.exp(1j * (ref_phase - cmath.phase(g))) for p, g in gains.items()}
    weights[reference] = 1.0 + 0j
    return Excitation(weights, {"target": target, "reference": reference})


def steer_azimuth(pset: PatternSet, phi0_deg: float, eps_null: float = EPS_NULL) -> Excitation:
    """Bidirectional azimuth beam from P3/P4/P5 toward ``phi0_deg`` (and its mirror)."""
    exc = phase_align(pset, TRIO, Direction.azimuth(phi0_deg), PortId.P3, eps_null)
    return Excitation(exc.weights, {**exc.meta, "mode": "trio", "phi0_deg": Direction.azimuth(phi0_deg).phi_deg})


def select_broadside(pset: PatternSet, phi0_deg: float) -> Tuple[PortId, bool]:
    """Broadside port with the larger horizon gain toward ``phi0_deg``; ties go to P1."""
    d = Direction.azimuth(phi0_deg)
    m1 = abs(pset.gain(PortId.P1, d))
    m2 = abs(pset.gain(PortId.P2, d))
    tie = abs(m1 - m2) <= 1e-9 * max(m1, m2, 1e-300)
    if tie or m1 > m2:
        return PortId.P1, tie
    return PortId.P2, False


def enhance_unidirectional(
    pset: PatternSet,
    phi0_deg: float,
    ratio: float = DEFAULT_RATIO,
    eps_null: float = EPS_NULL,
) -> Excitation:
    """Trio beam plus one broadside port that cancels the lobe at ``phi0 + 180``.

    ``ratio`` is the broadside weight magnitude relative to the unit trio
    weights. The broadside phase is chosen so its contribution at ``phi0``
    joins the trio's in-phase state; because the TM11 pattern changes sign
    across the origin it then subtracts at the mirrored azimuth.
    """
    if not 0.0 <= ratio <= 1.5:
        raise ValueError(f"ratio must lie in [0, 1.5], got {ratio}")
    base = steer_azimuth(pset, phi0_deg, eps_null)
    port, tie = select_broadside(pset, phi0_deg)
    meta = {**base.meta, "mode": "enhanced", "selected_port": port, "tie_break": tie, "ratio": float(ratio)}
    if ratio == 0:
        return Excitation(base.weights, meta)
    target = Direction.azimuth(phi0_deg)
    g_b = pset.gain(port, target)
    _check_null(pset, port, g_b, eps_null)
    trio_phase = cmath.phase(base.weight(PortId.P3) * pset.gain(PortId.P3, target))
    weights = dict(base.weights)
    weights[port] = ratio * cmath.exp(1j * (trio_phase - cmath.phase(g_b)))
    return Excitation(weights, meta)


def elevation_side(pair: Sequence[PortId]) -> Tuple[str, str]:
    """(plane, sign) that a broadside/TM21 port pair steers toward."""
    key = tuple(pair)
    for side, ports in ELEVATION_PAIRS.items():
        if ports == key or ports[::-1] == key:
            return side
    raise ValueError(f"{[p.name for p in key]} is not an elevation steering pair")


def steer_elevation(
    pset: PatternSet,
    plane: str,
    sign: str,
    scan_step_deg: float = 1.0,
    eps_null: float = EPS_NULL,
) -> Excitation:
    """Tilted beam in the xz or yz plane from one TM11/TM21 port pair.

    The target elevation is the in-plane angle (strictly between broadside and
    horizon, on the requested side) where the pair's summed magnitudes peak;
    the pair is then phase aligned there with the TM11 port as reference.
    """
    if plane not in _PLANE_PHI:
        raise ValueError(f"plane must be 'xz' or 'yz', got {plane!r}")
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    pair = ELEVATION_PAIRS[(plane, sign)]
    side_phi = _PLANE_PHI[plane] + (0.0 if sign == "+" else 180.0)
    thetas = np.arange(scan_step_deg, 90.0, scan_step_deg)
    total = sum(np.abs(pset.field(p, thetas, np.full_like(thetas, side_phi))) for p in pair)
    target = Direction(float(thetas[int(np.argmax(total))]), side_phi)
    exc = phase_align(pset, pair, target, reference=pair[0], eps_null=eps_null)
    return Excitation(exc.weights, {**exc.meta, "mode": "elevation", "plane": plane, "sign": sign})


def steer_elevation_pair(pset: PatternSet, pair: Sequence[PortId], **kw) -> Excitation:
    plane, sign = elevation_side(pair)
    return steer_elevation(pset, plane, sign, **kw)


def pattern(pset: PatternSet, exc: Excitation, theta_deg, phi_deg) -> np.ndarray:
    """Vectorized superposition ``sum_n w_n E_n``."""
    out = np.zeros(np.broadcast(np.asarray(theta_deg), np.asarray(phi_deg)).shape, dtype=complex)
    for p, w in exc.weights.items():
        out += w * pset.field(p, theta_deg, phi_deg)
    return out


def array_factor(pset: PatternSet, exc: Excitation, direction: Direction) -> complex:
    return complex(sum(w * pset.gain(p, direction) for p, w in exc.weights.items()))


def solid_angle_weights(grid: AngularGrid) -> np.ndarray:
    """Trapezoidal dOmega weights on ``grid`` (theta trapezoid x periodic phi)."""
    th = np.deg2rad(grid.thetas)
    w_th = np.full(grid.n_theta, np.deg2rad(grid.theta_step_deg))
    w_th[0] *= 0.5
    w_th[-1] *= 0.5
    w_ph = np.deg2rad(grid.phi_step_deg)
    return (w_th * np.sin(th))[:, None] * np.full(grid.n_phi, w_ph)[None, :]


def radiated_power(pset: PatternSet, exc: Excitation, grid: AngularGrid = AngularGrid()) -> float:
    th, ph = grid.mesh()
    return float(np.sum(np.abs(pattern(pset, exc, th, ph)) ** 2 * solid_angle_weights(grid)))


def directivity(pset: PatternSet, exc: Excitation, grid: AngularGrid = AngularGrid()) -> np.ndarray:
    """Linear directivity on ``grid``, normalized by the trapezoidal radiated power."""
    th, ph = grid.mesh()
    u = np.abs(pattern(pset, exc, th, ph)) ** 2
    total = float(np.sum(u * solid_angle_weights(grid)))
    if not total > 0:
        raise DegeneratePatternError("pattern radiates no power")
    return 4 * np.pi * u / total


def _db(x: float) -> float:
    return 10 * math.log10(x) if x > 0 else -math.inf


@dataclass(frozen=True)
class BeamReport:
    peak_direction: Direction
    peak_gain_db: float
    front_to_back_db: float
    beamwidth_deg: float
    directivity_dbi: float
    elevation_leakage_db: float
    threshold_db: float = -3.0


def _contiguous_width(row: np.ndarray, center: int, level: float, step: float) -> float:
    n = len(row)
    if np.all(row >= level):
        return n * step
    count = 1
    k = center
    while row[(k + 1) % n] >= level:
        k += 1
        count += 1
    k = center
    while row[(k - 1) % n] >= level:
        k -= 1
        count += 1
    return count * step


def beam_report(
    pset: PatternSet,
    exc: Excitation,
    grid: AngularGrid = AngularGrid(),
    threshold_db: float = -3.0,
    leakage_cone_deg: float = 45.0,
) -> BeamReport:
    """Peak, front-to-back, azimuth beamwidth and directivity of an excitation.

    The beamwidth is the contiguous azimuth span, on the grid row through the
    peak, staying above ``threshold_db`` relative to the peak. Elevation
    leakage is the strongest response within ``leakage_cone_deg`` of either
    pole, relative to the peak.
    """
    th, ph = grid.mesh()
    u = np.abs(pattern(pset, exc, th, ph)) ** 2
    umax = float(u.max())
    if not umax > 0:
        raise DegeneratePatternError("all-zero pattern")
    i, j = np.unravel_index(int(np.argmax(u)), u.shape)
    peak = Direction(float(grid.thetas[i]), float(grid.phis[j]))
    back = abs(array_factor(pset, exc, peak.mirrored())) ** 2
    ftb = math.inf if back == 0 else 10 * math.log10(umax / back)
    total = float(np.sum(u * solid_angle_weights(grid)))
    bw = _contiguous_width(u[i], j, umax * 10 ** (threshold_db / 10), grid.phi_step_deg)
    polar = (grid.thetas <= leakage_cone_deg) | (grid.thetas >= 180.0 - leakage_cone_deg)
    leak = float(u[polar].max()) if polar.any() else 0.0
    return BeamReport(
        peak_direction=peak,
        peak_gain_db=_db(umax),
        front_to_back_db=ftb,
        beamwidth_deg=bw,
        directivity_dbi=_db(4 * np.pi * umax / total),
        elevation_leakage_db=_db(leak / umax),
        threshold_db=threshold_db,
    )


def beam_cut(
    pset: PatternSet,
    exc: Excitation,
    plane: str = "azimuth",
    step_deg: float = 1.0,
    fixed_deg: float = 0.0,
):
    """Angles and complex pattern along a principal cut.

    ``plane="azimuth"`` sweeps phi in [0, 360) at theta = 90 (``fixed_deg``
    ignored). ``plane="elevation"`` sweeps the signed elevation angle
    -180..180 inside the vertical plane phi = ``fixed_deg``.
    """
    if plane == "azimuth":
        angles = np.arange(0.0, 360.0, step_deg)
        return angles, pattern(pset, exc, np.full_like(angles, 90.0), angles)
    if plane == "elevation":
        angles = np.arange(-180.0, 180.0 + step_deg / 2, step_deg)
        theta = np.abs(angles)
        phi = np.where(angles < 0, fixed_deg + 180.0, fixed_deg)
        return angles, pattern(pset, exc, theta, phi)
    raise ValueError(f"plane must be 'azimuth' or 'elevation', got {plane!r}")
