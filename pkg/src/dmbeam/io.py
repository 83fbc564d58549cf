"""CSV and manifest readers/writers shared by the CLI."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .errors import PatternSchemaError
from .link import BerCurve, BerRecord

BER_HEADER = ["angle_deg", "ber", "bit_errors", "bits", "seed"]
CUT_HEADER = ["angle_deg", "mag_db", "phase_deg"]
MAG_FLOOR_DB = -300.0


def _header(path) -> List[str]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [h.strip() for h in next(csv.reader(fh), [])]


def sniff_kind(path) -> str:
    """'ber', 'cut', 'pattern' or 'unknown' from the CSV header."""
    h = _header(path)
    if h == BER_HEADER:
        return "ber"
    if h == CUT_HEADER:
        return "cut"
    if h == ["port", "theta_deg", "phi_deg", "re", "im"]:
        return "pattern"
    return "unknown"


def write_ber_csv(curve: BerCurve, path) -> Path:
    path = Path(path)
    seed = curve.config.seed
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BER_HEADER)
        for r in curve.records:
            w.writerow([repr(float(r.angle_deg)), repr(float(r.ber)), r.bit_errors, r.bits, seed])
    return path


def read_ber_csv(path) -> Tuple[List[BerRecord], int]:
    """Records and seed of a BER CSV; rejects rows where ber != bit_errors / bits."""
    records = []
    seeds = set()
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != BER_HEADER:
            raise PatternSchemaError(f"{path}: header must be {','.join(BER_HEADER)}")
        for idx, rec in enumerate(reader, start=1):
            if not rec:
                continue
            try:
                angle, ber = float(rec[0]), float(rec[1])
                errors, bits, seed = int(rec[2]), int(rec[3]), int(rec[4])
            except (ValueError, IndexError):
                raise PatternSchemaError(f"{path}: malformed BER row", row=idx) from None
            if bits <= 0 or errors < 0 or errors > bits or ber != errors / bits:
                raise PatternSchemaError(f"{path}: inconsistent BER counts", row=idx)
            records.append(BerRecord(angle, errors, bits, ber))
            seeds.add(seed)
    if not records:
        raise PatternSchemaError(f"{path}: no BER rows")
    if len(seeds) != 1:
        raise PatternSchemaError(f"{path}: mixed seeds {sorted(seeds)}")
    return records, seeds.pop()


def is_periodic(angles) -> bool:
    """True when ``angles`` tile a full 360 degree ring."""
    a = np.asarray(angles, dtype=float)
    if len(a) < 2:
        return False
    step = a[1] - a[0]
    return abs(a[0]) < 1e-9 and abs(a[-1] + step - 360.0) < 1e-6


def write_beam_cut_csv(angles, values, path) -> Path:
    """Write a cut normalized to a 0 dB peak."""
    values = np.asarray(values, dtype=complex)
    mag = np.abs(values)
    peak = mag.max()
    if not peak > 0:
        raise ValueError("cannot normalize an all-zero cut")
    with np.errstate(divide="ignore"):
        mag_db = np.maximum(20 * np.log10(mag / peak), MAG_FLOOR_DB)
    phase = np.rad2deg(np.angle(values))
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CUT_HEADER)
        for a, m, p in zip(angles, mag_db, phase):
            w.writerow([repr(float(a)), repr(float(m)), repr(float(p))])
    return path


def read_beam_cut_csv(path):
    """(angles, mag_db, phase_deg) arrays."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != CUT_HEADER:
            raise PatternSchemaError(f"{path}: header must be {','.join(CUT_HEADER)}")
        rows = []
        for idx, rec in enumerate(reader, start=1):
            try:
                vals = [float(x) for x in rec]
            except ValueError:
                raise PatternSchemaError(f"{path}: malformed cut row", row=idx) from None
            if len(vals) != 3 or not all(math.isfinite(v) for v in vals):
                raise PatternSchemaError(f"{path}: malformed cut row", row=idx)
            rows.append(vals)
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def write_manifest(manifest: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
