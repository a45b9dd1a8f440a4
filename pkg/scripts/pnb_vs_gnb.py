"""pNB and gNB optimal distances for the exponential family Exp(k * scale),
and the pNB excess at the gNB-optimal coefficients.

    python scripts/pnb_vs_gnb.py --n-max 16
"""

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from beurling_lab import criteria as cr
from beurling_lab.basis import BasisSpec, SurvivalTarget
from beurling_lab.distributions import parse_distribution
from beurling_lab.gram import residual_with_coeffs, solve


@dataclass
class Config:
    n_max: int = 16
    scale: float = 1.0
    target: str = "chi"


def main(cfg: Config):
    fam = tuple(cr.preset_family("exp-dilated", cfg.n_max, cfg.scale))
    target = None if cfg.target == "chi" else SurvivalTarget(parse_distribution(cfg.target))
    kw = {} if target is None else {"target": target}
    gsys = cr.gnb_system(BasisSpec(fam, **kw))
    psys = cr.pnb_system(BasisSpec(fam, "pnb", **kw))
    var = np.diag(psys.g) - np.diag(gsys.g)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "gnb", "pnb", "excess_at_gnb_coeffs", "min_diag_variance_term"])
    for n in range(1, cfg.n_max + 1):
        g = solve(gsys.leading(n))
        p = solve(psys.leading(n))
        c = g.coeffs
        excess = residual_with_coeffs(psys.leading(n), c) - residual_with_coeffs(gsys.leading(n), c)
        w.writerow([n, g.distance_sq, p.distance_sq, excess, float(np.min(c * c * var[:n]))])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=Config.n_max)
    p.add_argument("--scale", type=float, default=Config.scale)
    p.add_argument("--target", default=Config.target, help="chi or a distribution literal")
    a = p.parse_args()
    main(Config(a.n_max, a.scale, a.target))
