#!/usr/bin/env python3
"""Sweep the existence detector across the H - 1/(4m) threshold."""
import argparse
import sys
from pathlib import Path

from fracwiener.cli import main as cli_main

CONFIG = """\
config_version = 1
kind = threshold-sweep
seed = {seed}
hurst = {hurst}
alpha = {alpha}
m = {m}
"""


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/threshold", help="artifact directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=int, default=1, help="half the operator order")
    ap.add_argument("--hurst", default="0.35, 0.4, 0.45")
    ap.add_argument("--alpha-max", type=float, default=0.3)
    ap.add_argument("--alpha-steps", type=int, default=13)
    args = ap.parse_args()

    step = args.alpha_max / (args.alpha_steps - 1)
    alphas = ", ".join(f"{i * step:.6g}" for i in range(args.alpha_steps))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = out / "config.cfg"
    cfg.write_text(
        CONFIG.format(seed=args.seed, hurst=args.hurst, alpha=alphas, m=args.m),
        encoding="utf-8",
    )
    return cli_main(["run", str(cfg), "--out", str(out)])


if __name__ == "__main__":
    sys.exit(main())
