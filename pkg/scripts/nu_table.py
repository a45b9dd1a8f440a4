"""||chi + sum_{k<=n} mu(k) k^-eps rho_{1/k}||^2 over a grid of n and eps,
with the critical-line value next to it as an independent check.

    python scripts/nu_table.py --ns 1,2,4,8,16,32,64 --eps 0.3,0.1,0.05
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

from beurling_lab import criteria as cr
from beurling_lab.basis import BasisSpec
from beurling_lab.zeta import load_or_build_grid, plancherel_residual


@dataclass
class Config:
    ns: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64])
    eps: list = field(default_factory=lambda: [0.3, 0.2, 0.1, 0.05])
    t_max: float = 5000.0
    grid_cache: str | None = None


def main(cfg: Config):
    grid = load_or_build_grid(cfg.t_max, 0.05, cfg.grid_cache)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "eps", "nu", "slack", "mellin", "mellin_tail_bound"])
    for e in cfg.eps:
        for n in cfg.ns:
            r = cr.nu_report(n, e)
            basis = BasisSpec(tuple(cr.preset_family("bd", n)), "deterministic")
            m = plancherel_residual(basis, cr.mobius_coeffs(n, e), grid)
            w.writerow([n, e, r.value, r.slack, m.value, m.tail_bound])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ns", default="1,2,4,8,16,32,64")
    p.add_argument("--eps", default="0.3,0.2,0.1,0.05")
    p.add_argument("--t-max", type=float, default=Config.t_max)
    p.add_argument("--grid-cache")
    a = p.parse_args()
    main(Config([int(x) for x in a.ns.split(",")], [float(x) for x in a.eps.split(",")], a.t_max, a.grid_cache))
