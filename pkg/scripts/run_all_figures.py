"""Regenerate every figure's data under one output directory.

    python scripts/run_all_figures.py --out runs/all --symbols 100000

Runs the pattern export, the steering batch, the eight-bob azimuth DM batch,
the two single-bob azimuth sweeps, the elevation sweeps and finally the
report over everything written.
"""

import argparse
import sys
from pathlib import Path

from dmbeam.cli import cmd_dm, cmd_patterns, cmd_report, cmd_steer, load_run_config


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/all"))
    ap.add_argument("--symbols", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args(argv)

    common = [f"dm.n_symbols={args.symbols}", f"dm.workers={args.workers}"]
    batches = {
        "patterns": (cmd_patterns, []),
        "steer": (cmd_steer, []),
        "dm_batch": (cmd_dm, []),
        "dm_single": (cmd_dm, ["dm.bobs=50,180"]),
        "dm_elevation": (cmd_dm, ["dm.sweep_plane=elevation", "dm.bobs=50,120"]),
    }
    for name, (cmd, overrides) in batches.items():
        out = args.out / name
        out.mkdir(parents=True, exist_ok=True)
        cfg = load_run_config(None, common + overrides, args.seed)
        print(f"== {name}")
        cmd(cfg, out)
    report = cmd_report(load_run_config(None, (), args.seed), args.out)
    print(f"report: {report}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
