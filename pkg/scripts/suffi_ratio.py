"""Hypothesis checks for the named families: the all-in-(0,1] probability,
the sufficiency lower bound and the (C) trend, as n grows.

    python scripts/suffi_ratio.py --preset exp-dilated --ns 2,4,8,16 --seed 3
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

from beurling_lab import criteria as cr
from beurling_lab.basis import BasisSpec
from beurling_lab.gram import solve
from beurling_lab.rng import RngStream


@dataclass
class Config:
    preset: str = "exp-dilated"
    ns: list = field(default_factory=lambda: [2, 4, 8, 16])
    seed: int = 3
    samples: int = 100_000
    beta: float = 1.5


def main(cfg: Config):
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "assumption_p", "suffi_bound", "suffi_stderr", "condition_c", "trend"])
    for n in cfg.ns:
        fam = tuple(cr.preset_family(cfg.preset, n))
        det = cfg.preset == "bd"
        basis = BasisSpec(fam, "deterministic" if det else "pnb")
        sb = cr.suffi_estimate(basis, cfg.samples, RngStream(cfg.seed))
        sys_ = cr.gnb_system(basis if det else basis.with_mode("gnb"))
        cc = cr.condition_c_report([solve(sys_.leading(k)).coeffs for k in range(1, n + 1)], cfg.beta)
        w.writerow([n, cr.assumption_p(basis), sb.value, sb.stderr, cc.value, cc.trend])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--preset", default=Config.preset, choices=cr.PRESETS)
    p.add_argument("--ns", default="2,4,8,16")
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--beta", type=float, default=Config.beta)
    a = p.parse_args()
    main(Config(a.preset, [int(x) for x in a.ns.split(",")], a.seed, a.samples, a.beta))
