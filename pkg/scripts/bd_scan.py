"""Optimal deterministic distances d_n^2 against the reference C / log n.

    python scripts/bd_scan.py --n-max 64 > bd_scan.csv
"""

import argparse
import csv
import sys
from dataclasses import dataclass

from beurling_lab import criteria as cr


@dataclass
class Config:
    n_max: int = 64
    tol: float = 1e-6
    threads: int = 1


def main(cfg: Config):
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "d_n_sq", "slack", "d_n_sq_log_n", "C_over_log_n", "below_reference"])
    for r in cr.bd_scan(cfg.n_max, cfg.tol, cfg.threads):
        below = int(r.n > 1 and r.d_n_sq < r.c_over_log_n)
        w.writerow([r.n, r.d_n_sq, r.slack, r.dn_sq_times_log_n, r.c_over_log_n, below])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=Config.n_max)
    p.add_argument("--tol", type=float, default=Config.tol)
    p.add_argument("--threads", type=int, default=Config.threads)
    a = p.parse_args()
    main(Config(a.n_max, a.tol, a.threads))
