#!/usr/bin/env python3
"""Desk-scale benchmark grid: N-100-{3,5,10} x {0.6, 0.7, 0.8} x 4 algorithms.

Writes one CSV row per (instance, seed, threshold, algorithm), prints the
aligned comparison table, and summarizes per-cell Ward medians.
"""

import argparse
import statistics
from collections import defaultdict

from gcluster import VnsConfig, preset_specs, render_table, rows_to_csv, run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=3, help="seeds per instance family")
    ap.add_argument("--out", default="small_grid.csv")
    ap.add_argument("--rmax", type=int, default=50)
    args = ap.parse_args()

    specs = preset_specs("table2-small", list(range(1, args.seeds + 1)))
    cfg = VnsConfig(r_max=args.rmax)
    rows = run_suite(
        specs,
        ["wards", "vns-wards", "kmeans", "vns-kmeans"],
        cfg,
        on_row=lambda r: print(
            f"  {r.instance} seed={r.seed} r2t={r.r2t} {r.algorithm}: "
            f"k={r.k} r2={r.r2:.4f} ({r.elapsed_seconds:.2f}s)"
        ),
    )
    rows_to_csv(rows, args.out)
    print()
    print(render_table(rows), end="")
    print(f"\nwrote {len(rows)} rows to {args.out}\n")

    medians = defaultdict(list)
    for row in rows:
        if row.algorithm == "wards" and not row.error:
            medians[(row.instance, row.r2t)].append(row.k)
    print("Ward medians over seeds:")
    for (name, r2t), ks in sorted(medians.items()):
        print(f"  {name} @ {r2t}: median k = {statistics.median(ks)} (runs: {sorted(ks)})")


if __name__ == "__main__":
    main()
