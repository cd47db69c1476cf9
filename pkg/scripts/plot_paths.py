"""Simulate one time-changed path and plot E_delta, X_delta(E_delta) and X(E_delta).

Needs matplotlib, which the package itself does not depend on. Without it
the CSV files are still written.

    python3 scripts/plot_paths.py --out results/paths
"""

import argparse
from pathlib import Path

import numpy as np

from tcsde.cli import cmd_simulate_path
from tcsde.config import load_config

ROOT = Path(__file__).resolve().parent.parent


def _load(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "tempered_paths.yaml")
    ap.add_argument("--out", type=Path, default=Path("results/paths"))
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    args.out.mkdir(parents=True, exist_ok=True)
    files = cmd_simulate_path(cfg, args.out)
    for f in files:
        print(f)

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the figure")
        return

    fig, (ax0, ax1) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    tc = _load(args.out / "time_change.csv")
    ax0.step(tc[:, 0], tc[:, 1], where="post", lw=1)
    ax0.set_ylabel(r"$E_\delta(t)$")
    y = _load(args.out / "approximation.csv")
    ax1.step(y[:, 0], y[:, 1], where="post", lw=1, label=r"$X_\delta(E_\delta(t))$")
    near = args.out / "near_exact.csv"
    if near.exists():
        x = _load(near)
        ax1.step(x[:, 0], x[:, 1], where="post", lw=1, ls="--", label=r"$X(E_\delta(t))$")
    ax1.set_xlabel("t")
    ax1.legend()
    fig.tight_layout()
    fig.savefig(args.out / "paths.png", dpi=150)
    print(args.out / "paths.png")


if __name__ == "__main__":
    main()
