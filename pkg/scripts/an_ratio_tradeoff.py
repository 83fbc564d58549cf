"""Secure-beam width and mirror-direction BER as the AN power grows.

More artificial noise narrows the region where the BER stays below the
threshold, at no cost to Bob (the noise cancels in his direction).
"""

import argparse

from dmbeam import Direction, LinkConfig, ber_beamwidth, ber_sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bob", type=float, default=50.0)
    ap.add_argument("--snr", type=float, default=12.0)
    ap.add_argument("--symbols", type=int, default=20_000)
    ap.add_argument("--an", type=str, default="0,0.25,0.5,1,2,4")
    ap.add_argument("--threshold", type=float, default=1e-2)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args(argv)

    print("an_ratio  width_deg  ber_bob    ber_mirror")
    for a in (float(x) for x in args.an.split(",")):
        cfg = LinkConfig(snr_db=args.snr, n_symbols=args.symbols, an_ratio=a, bob=Direction(90.0, args.bob))
        curve = ber_sweep(cfg, workers=args.workers)
        bw = ber_beamwidth(curve, args.threshold)
        print(
            f"{a:8.2f}  {bw.width_deg:9.1f}  {curve.at(args.bob).ber:.2e}  "
            f"{curve.at((args.bob + 180) % 360).ber:.3f}"
        )


if __name__ == "__main__":
    main()
