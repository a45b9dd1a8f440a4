"""Concentrated family with Mobius coefficients: pNB and gNB residuals
next to the deterministic value they approach as n grows.

    python scripts/concentrated.py --ns 2,4,6,8 --eps 0.1
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

from beurling_lab import criteria as cr
from beurling_lab import distributions as dist
from beurling_lab.basis import BasisSpec


@dataclass
class Config:
    ns: list = field(default_factory=lambda: [2, 4, 6, 8])
    eps: float = 0.1
    vartheta: float = 1.0


def main(cfg: Config):
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "eps", "vartheta", "nu", "gnb", "pnb", "pnb_over_nu"])
    for n in cfg.ns:
        fam = tuple(dist.concentrated_family(n, cfg.vartheta))
        c = cr.mobius_coeffs(n, cfg.eps)
        nu = cr.nu_eval(n, cfg.eps)
        g = cr.gnb_distance(BasisSpec(fam), c).distance_sq
        p = cr.pnb_distance(BasisSpec(fam, "pnb"), c).distance_sq
        w.writerow([n, cfg.eps, cfg.vartheta, nu, g, p, p / nu])
        sys.stdout.flush()


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ns", default="2,4,6,8")
    p.add_argument("--eps", type=float, default=Config.eps)
    p.add_argument("--vartheta", type=float, default=Config.vartheta)
    a = p.parse_args()
    main(Config([int(x) for x in a.ns.split(",")], a.eps, a.vartheta))
