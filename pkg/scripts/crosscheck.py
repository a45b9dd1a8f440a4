"""Optimal deterministic residuals in time and on the critical line.

    python scripts/crosscheck.py --n 8 --t-max 5000 --grid-cache /tmp/grid.csv
"""

import argparse
import csv
import sys
from dataclasses import dataclass

from beurling_lab import criteria as cr
from beurling_lab.zeta import load_or_build_grid


@dataclass
class Config:
    n: int = 8
    t_max: float = 5000.0
    step: float = 0.05
    grid_cache: str | None = None


def main(cfg: Config):
    grid = load_or_build_grid(cfg.t_max, cfg.step, cfg.grid_cache)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "time_domain", "mellin", "gap", "tail_bound"])
    for r in cr.plancherel_crosscheck(range(1, cfg.n + 1), grid):
        w.writerow([r.n, r.time_domain, r.mellin, r.gap, r.tail_bound])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=Config.n)
    p.add_argument("--t-max", type=float, default=Config.t_max)
    p.add_argument("--step", type=float, default=Config.step)
    p.add_argument("--grid-cache")
    a = p.parse_args()
    main(Config(a.n, a.t_max, a.step, a.grid_cache))
