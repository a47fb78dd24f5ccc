#!/usr/bin/env python3
"""Run a benchmark sweep and print MSE-vs-stride tables.

    python3 scripts/run_sweep.py                       # desk config next to this file
    python3 scripts/run_sweep.py my.json --out rows.csv
"""
import argparse
import json
import sys
import time
from pathlib import Path

from ptychodirect.bench import SweepConfig, phantom, sweep, window_label, write_csv, zero_estimate_mse


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("config", nargs="?", default=Path(__file__).with_name("desk_sweep.json"))
    ap.add_argument("--out", help="write all rows to this CSV file")
    args = ap.parse_args(argv)

    cfg = SweepConfig.from_dict(json.loads(Path(args.config).read_text()))
    t0 = time.perf_counter()
    rows = sweep(cfg)
    elapsed = time.perf_counter() - t0

    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)

    zero = zero_estimate_mse(phantom(cfg.N, cfg.seed))
    print(f"N={cfg.N} s={cfg.s} K={cfg.K} mode={cfg.mode} freq_step={cfg.resolved_freq_step()} "
          f"zero-estimate mse={zero:.4g} ({elapsed:.1f}s)")
    for metric in ("mse_total", "mse_phase"):
        print(f"\n{metric}")
        print("window    projector " + "".join(f"{'k=' + str(k):>9}" for k in cfg.kappas))
        for label in (window_label(w) for w in cfg.windows):
            for proj in cfg.projectors:
                cells = {r["kappa"]: r for r in rows if r["projector"] == proj and r["window"] == label}
                line = "".join(f"{cells[k][metric]:9.4f}" for k in cfg.kappas)
                print(f"{label:<9} {proj:<9} {line}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
