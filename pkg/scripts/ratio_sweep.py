"""Front-to-back ratio and elevation leakage of the enhanced beam versus ratio."""

import argparse

import numpy as np

from dmbeam import AngularGrid, beam_report, enhance_unidirectional, sample_pattern_set


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--phi0", type=float, default=90.0)
    ap.add_argument("--ratios", type=str, default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    ap.add_argument("--step", type=float, default=1.0, help="grid step, degrees")
    args = ap.parse_args(argv)

    pset = sample_pattern_set(AngularGrid(args.step, args.step))
    print("ratio  fb_db   peak_phi  hpbw   leak_db  dir_dbi")
    for r in (float(x) for x in args.ratios.split(",")):
        rep = beam_report(pset, enhance_unidirectional(pset, args.phi0, r))
        leak = rep.elevation_leakage_db if np.isfinite(rep.elevation_leakage_db) else float("-inf")
        print(
            f"{r:5.2f}  {rep.front_to_back_db:6.2f}  {rep.peak_direction.phi_deg:8.1f}  "
            f"{rep.beamwidth_deg:5.1f}  {leak:7.2f}  {rep.directivity_dbi:6.2f}"
        )


if __name__ == "__main__":
    main()
