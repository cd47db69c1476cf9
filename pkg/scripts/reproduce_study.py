"""Strong/weak error study for the tempered stable time change.

Runs the convergence study from ``configs/tempered_convergence.yaml`` (or a
given config), writes the CSV and JSON summary, and prints the fitted lines
together with WKERR in units of its standard error.

    python3 scripts/reproduce_study.py --out results/
"""

import argparse
import csv
import json
import logging
from math import log2
from pathlib import Path

from tcsde.cli import cmd_convergence
from tcsde.config import load_config

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "tempered_convergence.yaml")
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--n-paths", type=int, default=None)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.n_paths is not None:
        cfg.convergence.n_paths = args.n_paths
    if args.workers is not None:
        cfg.convergence.workers = args.workers
    args.out.mkdir(parents=True, exist_ok=True)
    cmd_convergence(cfg, args.out)

    summary = json.loads((args.out / "convergence_summary.json").read_text())
    with open(args.out / "convergence.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{'log2 delta':>10} {'log2 STERR':>11} {'log2 WKERR':>11} {'WKERR/SE':>9} {'mean N':>8}")
    for r in rows:
        d, s, w, wse = (float(r[k]) for k in ("delta", "sterr", "wkerr", "wkerr_stderr"))
        lw = f"{log2(w):11.3f}" if w > 0 else f"{'-inf':>11}"
        print(f"{log2(d):10.0f} {log2(s):11.3f} {lw} {w / wse if wse else 0.0:9.2f} "
              f"{float(r['mean_N']):8.1f}")
    for kind in ("strong", "weak"):
        slope, icept = summary[f"{kind}_slope"], summary[f"{kind}_intercept"]
        if slope is None:
            print(f"{kind}: slope undefined")
        else:
            print(f"{kind}: y = {slope:.4f} x {'+' if icept >= 0 else '-'} {abs(icept):.4f}")


if __name__ == "__main__":
    main()
