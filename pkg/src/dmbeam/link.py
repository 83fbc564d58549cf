"""Monte Carlo BER of directionally modulated QPSK over AWGN."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .dm import an_block, active_ports, qpsk_demap, qpsk_map, symbol_shares
from .errors import ConfigError, InsecureConfigurationError
from .patterns import PORTS, TRIO, Direction, PatternSet, PortId, analytic_set
from .synthesis import EPS_NULL, Excitation, enhance_unidirectional, phase_align, steer_azimuth

BEAMS = ("auto", "trio", "enhanced", "all")
_CHUNK = 1 << 16


@dataclass(frozen=True)
class LinkConfig:
    """One DM link experiment.

    ``beam`` picks the transmitting ports: ``trio`` (P3-P5, bidirectional),
    ``enhanced`` (trio plus the broadside port chosen for Bob's azimuth, or
    just the trio when ``ratio`` is 0), ``all`` (P1-P5) or ``auto``
    (``enhanced`` for azimuth sweeps, ``all`` for elevation sweeps).
    ``symbol_split="excitation"`` weights each port's symbol share by the
    synthesized excitation instead of splitting it uniformly.
    """

    snr_db: float = 12.0
    n_symbols: int = 100_000
    an_ratio: float = 1.0
    bob: Direction = Direction(90.0, 50.0)
    sweep_plane: str = "azimuth"
    cut_phi_deg: float = 0.0
    angle_step_deg: float = 1.0
    seed: int = 0
    beam: str = "auto"
    ratio: float = 0.6
    snr_convention: str = "es"
    symbol_split: str = "uniform"
    efficiency_scaling: bool = False
    p45_kind: str = "traveling"
    eps_null: float = EPS_NULL

    def __post_init__(self):
        if not isinstance(self.bob, Direction):
            object.__setattr__(self, "bob", Direction(*self.bob))
        if int(self.n_symbols) != self.n_symbols or self.n_symbols < 1000:
            raise ConfigError(f"n_symbols must be an integer >= 1000, got {self.n_symbols}")
        if not math.isfinite(self.snr_db):
            raise ConfigError("snr_db must be finite")
        if not (math.isfinite(self.an_ratio) and self.an_ratio >= 0):
            raise ConfigError(f"an_ratio must be >= 0, got {self.an_ratio}")
        if self.sweep_plane not in ("azimuth", "elevation"):
            raise ConfigError(f"sweep_plane must be 'azimuth' or 'elevation', got {self.sweep_plane!r}")
        if self.beam not in BEAMS:
            raise ConfigError(f"beam must be one of {BEAMS}, got {self.beam!r}")
        if self.snr_convention not in ("es", "eb"):
            raise ConfigError(f"snr_convention must be 'es' or 'eb', got {self.snr_convention!r}")
        if self.symbol_split not in ("uniform", "excitation"):
            raise ConfigError(f"symbol_split must be 'uniform' or 'excitation', got {self.symbol_split!r}")
        if not 0 <= self.ratio <= 1.5:
            raise ConfigError(f"ratio must lie in [0, 1.5], got {self.ratio}")
        span = 360.0 if self.sweep_plane == "azimuth" else 180.0
        n = span / self.angle_step_deg if self.angle_step_deg > 0 else 0
        if not (self.angle_step_deg > 0 and abs(n - round(n)) < 1e-9):
            raise ConfigError(f"angle_step_deg must divide {span:g}, got {self.angle_step_deg}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def noise_variance(self) -> float:
        """Complex AWGN variance for unit symbol energy at Bob."""
        snr = 10 ** (self.snr_db / 10)
        return 1.0 / snr if self.snr_convention == "es" else 1.0 / (2 * snr)

    @property
    def periodic(self) -> bool:
        return self.sweep_plane == "azimuth"

    def angles(self) -> np.ndarray:
        if self.periodic:
            return np.arange(round(360.0 / self.angle_step_deg)) * self.angle_step_deg
        return np.arange(round(180.0 / self.angle_step_deg) + 1) * self.angle_step_deg

    def direction(self, angle_deg: float) -> Direction:
        if self.periodic:
            return Direction(90.0, angle_deg)
        return Direction(angle_deg, self.cut_phi_deg)

    def pattern_set(self) -> PatternSet:
        return analytic_set(self.efficiency_scaling, self.p45_kind)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bob"] = [self.bob.theta_deg, self.bob.phi_deg]
        return d


def resolve_beam(config: LinkConfig, pset: PatternSet) -> Tuple[Tuple[PortId, ...], Optional[Excitation]]:
    """Transmitting ports and the excitation behind them."""
    beam = config.beam
    if beam == "auto":
        beam = "enhanced" if config.periodic else "all"
    phi0 = config.bob.phi_deg
    if beam == "trio":
        return TRIO, steer_azimuth(pset, phi0, config.eps_null)
    if beam == "enhanced":
        exc = enhance_unidirectional(pset, phi0, config.ratio, config.eps_null)
        return exc.ports, exc
    active, _, _ = active_ports(pset, config.bob, PORTS, config.eps_null)
    usable = tuple(p for p, a in zip(PORTS, active) if a)
    if not usable:
        raise InsecureConfigurationError(f"no port radiates toward {config.bob}")
    ref = PortId.P3 if PortId.P3 in usable else usable[0]
    return PORTS, phase_align(pset, usable, config.bob, ref, config.eps_null)


class BerRecord(NamedTuple):
    angle_deg: float
    bit_errors: int
    bits: int
    ber: float


def angle_key(angle_deg: float) -> int:
    """Integer RNG stream key for an observation angle (millidegree resolution)."""
    return int(round(angle_deg * 1000))


class _Link:
    """Pre-resolved transmit side of a config; cheap to reuse across angles."""

    def __init__(self, config: LinkConfig, pset: Optional[PatternSet] = None):
        self.config = config
        self.pset = pset or config.pattern_set()
        ports, exc = resolve_beam(config, self.pset)
        self.active, self.gains_bob, self.nulled = active_ports(self.pset, config.bob, ports, config.eps_null)
        self.n_active = int(self.active.sum())
        if self.n_active < 2:
            raise InsecureConfigurationError(
                f"only {self.n_active} port(s) usable toward {config.bob}; directional modulation needs at least 2"
            )
        self.share = symbol_shares(self.active, self.gains_bob, exc if config.symbol_split == "excitation" else None)

    def run(self, angle_deg: float) -> BerRecord:
        cfg = self.config
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(angle_key(angle_deg),)))
        eve = cfg.direction(angle_deg)
        # per-port channel from transmit samples to the observer, active ports only
        h = self.pset.gains(eve)[self.active] / self.gains_bob[self.active]
        g_sym = complex(np.dot(self.share[self.active], h))
        sigma = math.sqrt(cfg.noise_variance / 2)
        errors = 0
        left = cfg.n_symbols
        while left:
            n = min(left, _CHUNK)
            bits = rng.integers(0, 2, size=2 * n, dtype=np.uint8)
            sym = qpsk_map(bits)
            z = an_block(rng, cfg.an_ratio, self.n_active, n)
            y = g_sym * sym + h @ z
            y += sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
            errors += int(np.count_nonzero(qpsk_demap(y) != bits))
            left -= n
        nbits = 2 * cfg.n_symbols
        return BerRecord(float(angle_deg), errors, nbits, errors / nbits)


def ber_at(config: LinkConfig, angle_deg: float, pset: Optional[PatternSet] = None) -> BerRecord:
    """BER seen by a receiver at ``angle_deg`` on the sweep plane.

    The draw stream depends only on ``(config.seed, angle_deg)``, so a single
    angle reproduces the matching point of :func:`ber_sweep`.
    """
    return _Link(config, pset).run(angle_deg)


@dataclass
class BerCurve:
    records: List[BerRecord]
    config: LinkConfig
    wall_clock_s: float = 0.0

    @property
    def angles(self) -> np.ndarray:
        return np.array([r.angle_deg for r in self.records])

    @property
    def ber(self) -> np.ndarray:
        return np.array([r.ber for r in self.records])

    @property
    def bit_errors(self) -> np.ndarray:
        return np.array([r.bit_errors for r in self.records])

    def at(self, angle_deg: float) -> BerRecord:
        k = int(np.argmin(np.abs(self.angles - angle_deg)))
        return self.records[k]


def ber_sweep(config: LinkConfig, pset: Optional[PatternSet] = None, workers: int = 1) -> BerCurve:
    """BER over the configured plane; identical output for any ``workers``."""
    t0 = time.perf_counter()
    link = _Link(config, pset)
    angles = [float(a) for a in config.angles()]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(link.run, angles))
    else:
        records = [link.run(a) for a in angles]
    return BerCurve(records, config, time.perf_counter() - t0)


class Beamwidth(NamedTuple):
    width_deg: float
    start_deg: float
    stop_deg: float
    empty: bool


def _runs(mask: np.ndarray, periodic: bool) -> List[Tuple[int, int]]:
    """Maximal runs of True as (start, length); a run may wrap when ``periodic``."""
    n = len(mask)
    if mask.all():
        return [(0, n)]
    runs = []
    k = 0
    while k < n:
        if mask[k]:
            s = k
            while k < n and mask[k]:
                k += 1
            runs.append((s, k - s))
        else:
            k += 1
    if periodic and len(runs) > 1 and runs[0][0] == 0 and runs[-1][0] + runs[-1][1] == n:
        s, length = runs.pop()
        runs[0] = (s, length + runs[0][1])
    return runs


def _curve_arrays(curve, periodic):
    if isinstance(curve, BerCurve):
        angles, ber = curve.angles, curve.ber
        periodic = curve.config.periodic if periodic is None else periodic
    else:
        angles, ber = (np.asarray(x, dtype=float) for x in curve)
        if periodic is None:
            raise ValueError("periodic must be given for raw (angles, ber) input")
    return angles, ber, periodic


def _span(angles, periodic):
    step = float(angles[1] - angles[0]) if len(angles) > 1 else 0.0
    full = len(angles) * step if periodic else float(angles[-1] - angles[0])
    return step, full


def low_ber_lobes(curve, threshold: float = 1e-2, periodic: Optional[bool] = None) -> List[Beamwidth]:
    """Every contiguous angular region with BER below ``threshold``."""
    angles, ber, periodic = _curve_arrays(curve, periodic)
    step, full = _span(angles, periodic)
    out = []
    for s, length in _runs(ber < threshold, periodic):
        stop = angles[(s + length - 1) % len(angles)]
        out.append(Beamwidth(min(length * step, full), float(angles[s]), float(stop), False))
    return out


def ber_beamwidth(curve, threshold: float = 1e-2, periodic: Optional[bool] = None) -> Beamwidth:
    """Width of the below-threshold region containing the BER minimum.

    Returns a zero width with ``empty=True`` when no angle is below threshold.
    """
    angles, ber, periodic = _curve_arrays(curve, periodic)
    step, full = _span(angles, periodic)
    kmin = int(np.argmin(ber))
    if not ber[kmin] < threshold:
        return Beamwidth(0.0, math.nan, math.nan, True)
    n = len(angles)
    for s, length in _runs(ber < threshold, periodic):
        if (kmin - s) % n < length if periodic else s <= kmin < s + length:
            stop = angles[(s + length - 1) % n]
            return Beamwidth(min(length * step, full), float(angles[s]), float(stop), False)
    raise AssertionError("minimum not inside any run")  # pragma: no cover
