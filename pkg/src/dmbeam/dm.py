"""Directional modulation: QPSK, zero-sum artificial noise, per-port pattern inversion.

Each active port transmits ``s_n = (a_n * symbol + z_n) / E_n(bob)`` where
``a_n`` is the port's share of the symbol (``1/N_active`` by default) and
``z`` is artificial noise with ``sum(z) == 0``. Along Bob's direction the
pattern inversion undoes every ``E_n`` so the receiver sees
``sum(a_n) * symbol + sum(z) == symbol``; anywhere else the per-port
ratios ``E_n(dir) / E_n(bob)`` differ and the noise survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import FramingError, InsecureConfigurationError
from .patterns import PORTS, Direction, PatternSet, PortId
from .synthesis import EPS_NULL, Excitation

SQRT_HALF = np.sqrt(0.5)


def qpsk_map(bits) -> np.ndarray:
    """Gray-mapped unit-energy QPSK: 00, 01, 11, 10 -> quadrants I, II, III, IV."""
    b = np.asarray(bits, dtype=np.uint8).ravel()
    if b.size % 2:
        raise FramingError(f"QPSK needs an even number of bits, got {b.size}")
    if b.size and b.max() > 1:
        raise FramingError("bits must be 0 or 1")
    first, second = b[0::2], b[1::2]
    return ((1.0 - 2.0 * second) + 1j * (1.0 - 2.0 * first)) * SQRT_HALF


def qpsk_demap(samples) -> np.ndarray:
    """Quadrant (minimum-distance) detection; returns the interleaved bit stream."""
    y = np.asarray(samples, dtype=complex).ravel()
    if not np.all(np.isfinite(y)):
        raise ValueError("samples must be finite")
    out = np.empty(2 * y.size, dtype=np.uint8)
    out[0::2] = y.imag < 0
    out[1::2] = y.real < 0
    return out


def evm(received, reference) -> float:
    """RMS error-vector magnitude relative to the reference RMS."""
    r = np.asarray(reference, dtype=complex)
    e = np.asarray(received, dtype=complex) - r
    return float(np.sqrt(np.mean(np.abs(e) ** 2) / np.mean(np.abs(r) ** 2)))


@dataclass(frozen=True)
class AnVector:
    z: np.ndarray
    an_ratio: float

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.z) ** 2))


def an_block(rng: np.random.Generator, an_ratio: float, n_ports: int, n: int) -> np.ndarray:
    """``n`` independent zero-sum noise vectors as a ``(n_ports, n)`` array.

    Circular Gaussian draws, mean removed across ports, each column rescaled
    to total power ``an_ratio``.
    """
    if an_ratio < 0:
        raise ValueError(f"an_ratio must be >= 0, got {an_ratio}")
    if an_ratio == 0 or n_ports < 2:
        return np.zeros((n_ports, n), dtype=complex)
    z = rng.standard_normal((n_ports, n)) + 1j * rng.standard_normal((n_ports, n))
    z -= z.mean(axis=0)
    power = np.sum(z.real**2 + z.imag**2, axis=0)
    z *= np.sqrt(an_ratio / power)
    z -= z.mean(axis=0)  # scrub rounding left by the rescale
    return z


def gen_an(rng: np.random.Generator, an_ratio: float, n_ports: int = len(PORTS)) -> AnVector:
    return AnVector(an_block(rng, an_ratio, n_ports, 1)[:, 0], float(an_ratio))


@dataclass(frozen=True)
class DmFrame:
    """Per-port transmit samples (P1..P5 order) for one symbol."""

    samples: np.ndarray
    bob: Direction
    plane: str
    active: Tuple[bool, ...]
    symbol: complex
    nulled: Tuple[PortId, ...] = ()

    @property
    def transmit_power(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    def scaled(self, c: complex) -> "DmFrame":
        return DmFrame(self.samples * c, self.bob, self.plane, self.active, self.symbol * c, self.nulled)


def active_ports(
    pset: PatternSet,
    bob: Direction,
    ports: Sequence[PortId] = PORTS,
    eps_null: float = EPS_NULL,
):
    """Boolean mask (P1..P5) of usable ports, and the subset dropped as nulls at ``bob``."""
    gains = pset.gains(bob)
    allowed = np.array([p in ports for p in PORTS])
    above = np.array([abs(g) >= eps_null * pset.peak(p) for p, g in zip(PORTS, gains)])
    nulled = tuple(p for p, a, ok in zip(PORTS, allowed, above) if a and not ok)
    return allowed & above, gains, nulled


def symbol_shares(
    active: np.ndarray,
    gains: np.ndarray,
    excitation: Optional[Excitation] = None,
) -> np.ndarray:
    """Fraction of the symbol carried by each port; sums to 1 over active ports.

    Uniform ``1/N_active`` unless ``excitation`` is given, in which case each
    port's share is its weighted contribution ``w_n E_n(bob)`` at Bob.
    """
    share = np.zeros(len(PORTS), dtype=complex)
    if excitation is None:
        share[active] = 1.0 / active.sum()
        return share
    contrib = excitation.vector() * gains * active
    total = contrib.sum()
    if abs(total) == 0:
        raise InsecureConfigurationError("excitation has no gain toward Bob on active ports")
    return contrib / total


def dm_transmit(symbols, z, gains, active, share) -> np.ndarray:
    """Vectorized per-port transmit block of shape ``(5, n)``.

    ``z`` has one row per active port (already zero-sum).
    """
    symbols = np.asarray(symbols, dtype=complex)
    out = np.zeros((len(PORTS), symbols.size), dtype=complex)
    g = gains[active][:, None]
    out[active] = (share[active][:, None] * symbols[None, :] + z) / g
    return out


def dm_excite(
    symbol: complex,
    an: AnVector,
    pset: PatternSet,
    bob: Direction,
    plane: str = "azimuth",
    ports: Sequence[PortId] = PORTS,
    excitation: Optional[Excitation] = None,
    eps_null: float = EPS_NULL,
) -> DmFrame:
    """Per-port samples that deliver ``symbol`` intact toward ``bob``.

    Ports outside ``ports`` or below the null threshold at ``bob`` transmit
    zero; their noise samples are spread evenly over the active ports so the
    active noise still sums to zero.
    """
    active, gains, nulled = active_ports(pset, bob, ports, eps_null)
    n_active = int(active.sum())
    if n_active < 2:
        raise InsecureConfigurationError(
            f"only {n_active} port(s) usable toward {bob}; directional modulation needs at least 2"
        )
    z = np.array(an.z, dtype=complex)
    if z.size != len(PORTS):
        raise ValueError(f"AN vector must have {len(PORTS)} entries, got {z.size}")
    z[active] += z[~active].sum() / n_active
    share = symbol_shares(active, gains, excitation)
    samples = dm_transmit(np.array([symbol]), z[active][:, None], gains, active, share)[:, 0]
    return DmFrame(samples, bob, plane, tuple(bool(a) for a in active), complex(symbol), nulled)


def observe_at(frame: DmFrame, direction: Direction, pset: PatternSet) -> complex:
    return complex(np.dot(frame.samples, pset.gains(direction)))
