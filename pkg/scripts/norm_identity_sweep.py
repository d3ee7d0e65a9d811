#!/usr/bin/env python3
"""Run the norm-identity experiment over the standard six Hurst values."""
import argparse
import sys
from pathlib import Path

from fracwiener.cli import main as cli_main

CONFIG = """\
config_version = 1
kind = norm-identity
seed = {seed}
hurst = 0.1, 0.25, 0.4, 0.6, 0.75, 0.9
n_functions = {n}
"""


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/norm-identity", help="artifact directory")
    ap.add_argument("--seed", type=int, default=101)
    ap.add_argument("--functions", type=int, default=20, help="random step functions per H")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = out / "config.cfg"
    cfg.write_text(CONFIG.format(seed=args.seed, n=args.functions), encoding="utf-8")
    return cli_main(["run", str(cfg), "--out", str(out)])


if __name__ == "__main__":
    sys.exit(main())
