#!/usr/bin/env python3
"""Print the DD sensitivity chain as a table for both protocols.

Usage:
    python scripts/sensitivity_table.py [--config PATH] [--workers N]

Runs the dynamical-decoupling sensitivity pipeline (amplitude sweep ->
transduction fit -> minimum detectable field -> spectral / concentration
sensitivity) for each (protocol, n_pi) in the config and prints one line
per report.  Defaults to the bundled fig5 configuration.
"""

import argparse
import sys

from echosense import harness


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None,
                    help="JSON experiment config (default: bundled fig5)")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = (harness.load_config(args.config) if args.config
           else harness.bundled_config("fig5"))
    reports = harness.run_sensitivity(cfg, workers=args.workers)
    hdr = (f"{'protocol':<9} {'n_pi':>4} {'tau_us':>7} {'method':>17} "
           f"{'slope_deg_per_T':>15} {'b_min_T':>10} {'S_T_sqrtHz':>11} "
           f"{'S_vol':>10}")
    print(hdr)
    print("-" * len(hdr))
    for rep in reports:
        print(f"{rep.protocol:<9} {rep.n_pi:>4} {rep.tau * 1e6:>7.2f} "
              f"{rep.fit.method.value:>17} {rep.fit.slope:>15.4e} "
              f"{rep.b_min:>10.3e} {rep.s_spectral:>11.3e} "
              f"{rep.s_concentration:>10.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
