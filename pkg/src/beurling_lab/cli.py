"""Command-line front end.

Every subcommand writes a CSV table (``#`` metadata lines, then a header)
or, with ``--format json``, a JSON document that embeds the resolved
configuration. Values come from defaults, then ``--config FILE`` (JSON),
then explicit flags. Exit codes: 0 success, 2 usage, 3 numerical or
resource failure (the error is printed to stderr as JSON).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import criteria as cr
from . import distributions as dist
from .basis import CHI, BasisSpec, SurvivalTarget
from .errors import LabError, PrecisionWarning
from .muntz import identity_gap
from .rng import RngStream

DEFAULTS = {
    "common": {"threads": 1, "seed": None, "format": "csv", "output": None, "tol": 1e-6},
    "dist": {"preset": "bd", "n_max": 16, "scale": None, "vartheta": 1.0},
    "nu": {"n": 8, "eps": [0.3, 0.2, 0.1, 0.05]},
    "gnb": {"basis": None, "preset": None, "n": None, "scale": None, "vartheta": 1.0,
            "target": "chi", "coeffs": None, "mobius_eps": None},
    "crosscheck": {"n": 4, "T": 5000.0, "step": 0.05, "grid_cache": None},
    "muntz-check": {"dist": "exp:1", "samples": 1_000_000, "t_min": 0.01, "t_max": 100.0,
                    "points": 20},
    "zeta": {"t": 0.0, "sigma": 0.5},
    "hypotheses": {"preset": "exp-dilated", "n": 8, "scale": None, "vartheta": 1.0,
                   "samples": 100_000, "beta": 1.5, "alphas": [1.0, 2.0, 3.0]},
    "vn": {"n": 4, "eps": 0.1, "preset": "concentrated", "vartheta": 1.0, "samples": 10_000,
           "t_max": 50.0, "points": 26},
}
DEFAULTS["pnb"] = dict(DEFAULTS["gnb"])
MONTE_CARLO = {"muntz-check", "vn"}


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file with option values")
    common.add_argument("--threads", type=int, help="worker threads (never changes results)")
    common.add_argument("--seed", type=int, help="seed for Monte Carlo runs")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, help="target accuracy of inner products")

    p = argparse.ArgumentParser(prog="beurling-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def family_opts(q, preset_choices=cr.PRESETS):
        q.add_argument("--preset", choices=preset_choices)
        q.add_argument("--scale", type=float, help="rate scale of exp-dilated / gamma-kn")
        q.add_argument("--vartheta", type=float, help="concentration exponent")

    q = sub.add_parser("dist", parents=[common], argument_default=S, help="d_n^2 scan")
    family_opts(q)
    q.add_argument("--n-max", type=int, dest="n_max")

    q = sub.add_parser("nu", parents=[common], argument_default=S, help="nu_{n,eps}")
    q.add_argument("--n", type=int)
    q.add_argument("--eps", type=_floats)

    for name in ("gnb", "pnb"):
        q = sub.add_parser(name, parents=[common], argument_default=S, help=f"{name} distance")
        q.add_argument("--basis", help="comma-separated distribution literals")
        family_opts(q)
        q.add_argument("--n", type=int)
        q.add_argument("--target", help="'chi' or a distribution literal (its survival function)")
        q.add_argument("--coeffs", type=_floats)
        q.add_argument("--mobius-eps", type=float, dest="mobius_eps",
                       help="use c_k = -mu(k) k^-eps instead of the optimal coefficients")

    q = sub.add_parser("crosscheck", parents=[common], argument_default=S,
                       help="time-domain vs critical-line residuals")
    q.add_argument("--n", type=int)
    q.add_argument("--T", type=float, dest="T")
    q.add_argument("--step", type=float)
    q.add_argument("--grid-cache", dest="grid_cache")

    q = sub.add_parser("muntz-check", parents=[common], argument_default=S,
                       help="E{X/t} = -Pf(t) against Monte Carlo")
    q.add_argument("--dist")
    q.add_argument("--samples", type=int)
    q.add_argument("--t-min", type=float, dest="t_min")
    q.add_argument("--t-max", type=float, dest="t_max")
    q.add_argument("--points", type=int)

    q = sub.add_parser("zeta", parents=[common], argument_default=S, help="zeta(sigma + it)")
    q.add_argument("--t", type=float)
    q.add_argument("--sigma", type=float)

    q = sub.add_parser("hypotheses", parents=[common], argument_default=S,
                       help="assumption (P), moment growth, (C), (T2), suffi lower bound")
    family_opts(q)
    q.add_argument("--n", type=int)
    q.add_argument("--samples", type=int)
    q.add_argument("--beta", type=float)
    q.add_argument("--alphas", type=_floats)

    q = sub.add_parser("vn", parents=[common], argument_default=S, help="Monte Carlo E V_n(t)")
    family_opts(q)
    q.add_argument("--n", type=int)
    q.add_argument("--eps", type=float)
    q.add_argument("--samples", type=int)
    q.add_argument("--t-max", type=float, dest="t_max")
    q.add_argument("--points", type=int)
    return p


def resolve(argv) -> dict:
    """Merge defaults, the config file and explicit flags."""
    ns = vars(_build_parser().parse_args(argv))
    name = ns.pop("subcommand")
    cfg = dict(DEFAULTS["common"])
    cfg.update(DEFAULTS[name])
    path = ns.pop("config", None)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        loaded.pop("subcommand", None)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {name}: {sorted(unknown)}")
        cfg.update(loaded)
    cfg.update(ns)
    cfg["subcommand"] = name
    if name in MONTE_CARLO and cfg.get("seed") is None:
        raise UsageError(f"{name} draws random samples; --seed is required")
    if int(cfg["threads"]) < 1:
        raise UsageError("--threads must be >= 1")
    return cfg


# --------------------------------------------------------------------------
# subcommands: each returns (columns, rows, extra metadata)


def _family(cfg) -> list:
    n = cfg.get("n") if cfg.get("n") is not None else cfg.get("n_max")
    return cr.preset_family(cfg["preset"], int(n), cfg.get("scale"), float(cfg.get("vartheta", 1.0)))


def _cmd_dist(cfg):
    n_max = int(cfg["n_max"])
    cols = ["n", "d_n_sq", "slack", "dn_sq_times_log_n", "C_over_log_n"]
    if cfg["preset"] == "bd":
        rows = [[r.n, r.d_n_sq, r.slack, r.dn_sq_times_log_n, r.c_over_log_n]
                for r in cr.bd_scan(n_max, cfg["tol"], cfg["threads"])]
    else:
        basis = BasisSpec(tuple(_family(cfg)), "gnb")
        sys_ = cr.gnb_system(basis, cfg["tol"], cfg["threads"])
        rows = []
        for n in range(1, n_max + 1):
            rep = cr.solve(sys_.leading(n))
            ln = math.log(n)
            rows.append([n, rep.distance_sq, rep.certified_slack,
                         rep.distance_sq * ln if n > 1 else math.nan,
                         cr.BURNOL_C / ln if n > 1 else math.nan])
    return cols, rows, {"burnol_C": cr.BURNOL_C}


def _cmd_nu(cfg):
    eps = cfg["eps"] if isinstance(cfg["eps"], list) else [cfg["eps"]]
    rows = []
    for e in eps:
        r = cr.nu_report(int(cfg["n"]), float(e), cfg["tol"], cfg["threads"])
        rows.append([r.n, r.epsilon, r.value, r.slack])
    return ["n", "eps", "nu", "slack"], rows, {}


def _basis_from(cfg, mode):
    if cfg.get("basis"):
        elems = [dist.parse_distribution(s) for s in str(cfg["basis"]).split(",") if s.strip()]
    elif cfg.get("preset"):
        if cfg.get("n") is None:
            raise UsageError("--preset needs --n")
        elems = _family(cfg)
    else:
        raise UsageError("give --basis literals or --preset with --n")
    tgt = cfg.get("target") or "chi"
    target = CHI if tgt == "chi" else SurvivalTarget(dist.parse_distribution(tgt))
    return BasisSpec(tuple(elems), mode, True, target)


def _cmd_distance(cfg, mode):
    basis = _basis_from(cfg, mode)
    coeffs = cfg.get("coeffs")
    if cfg.get("mobius_eps") is not None:
        coeffs = list(cr.mobius_coeffs(basis.n, cfg["mobius_eps"]))
    fn = cr.gnb_distance if mode == "gnb" else cr.pnb_distance
    rep = fn(basis, coeffs, cfg["tol"], cfg["threads"])
    cols = ["k", "element", "coeff"]
    rows = [[k, lab, float(c)] for k, (lab, c) in enumerate(zip(basis.labels(), rep.coeffs), 1)]
    meta = {
        "mode": mode,
        "target": basis.target.label(),
        "distance_sq": rep.distance_sq,
        "certified_slack": rep.certified_slack,
        "condition_estimate": rep.condition_estimate,
        "dropped_modes": rep.dropped_modes,
        "clamped": rep.clamped,
    }
    return cols, rows, meta


def _cmd_crosscheck(cfg):
    from .zeta import load_or_build_grid

    grid = load_or_build_grid(cfg["T"], cfg["step"], cfg.get("grid_cache"), cfg["threads"])
    ns = list(range(1, int(cfg["n"]) + 1))
    rows = []
    for r in cr.plancherel_crosscheck(ns, grid, cfg["tol"], cfg["threads"]):
        ok = r.gap <= 1e-2 + r.tail_bound
        rows.append([r.n, r.time_domain, r.mellin, r.gap, r.tail_bound, r.gram_slack, int(ok)])
    cols = ["n", "time_domain", "mellin", "gap", "tail_bound", "gram_slack", "within_budget"]
    return cols, rows, {"grid_route_diff": grid.route_diff}


def _cmd_muntz(cfg):
    d = dist.parse_distribution(cfg["dist"])
    ts = np.logspace(math.log10(cfg["t_min"]), math.log10(cfg["t_max"]), int(cfg["points"]))
    rng = RngStream(int(cfg["seed"]), 0)
    rows = []
    worst = 0.0
    for g in identity_gap(d, ts, int(cfg["samples"]), rng, cfg["threads"]):
        ratio = g.gap / g.mc_stderr if g.mc_stderr > 0 else (0.0 if g.gap == 0 else math.inf)
        worst = max(worst, ratio)
        rows.append([g.t, g.mc_mean, g.transform, g.gap, g.mc_stderr, ratio])
    cols = ["t", "mc_mean", "muntz_transform", "gap", "stderr", "gap_over_stderr"]
    return cols, rows, {"max_gap_over_stderr": worst, "within_4_stderr": worst <= 4.0}


def _cmd_zeta(cfg):
    from .zeta import zeta_eval, zeta_report

    s = complex(cfg["sigma"], cfg["t"])
    r = zeta_report(s)
    zeta_eval(s)  # emits the precision warnings recorded in the metadata
    return (["sigma", "t", "re", "im", "abs", "route_diff", "validated"],
            [[s.real, s.imag, r.value.real, r.value.imag, abs(r.value), r.route_diff, int(r.validated)]],
            {})


def _cmd_hypotheses(cfg):
    fam = _family(cfg)
    n = len(fam)
    basis = BasisSpec(tuple(fam), "pnb", True, CHI)
    rows = [["assumption_p", "", cr.assumption_p(basis), ""]]
    for m in cr.moment_growth(fam, cfg["alphas"]):
        rows.append(["moment_growth", f"alpha={m.alpha!r}", m.sup, "violation" if m.violation else "ok"])
    # condition (C) on the optimal coefficients of the leading systems
    sys_ = cr.gnb_system(basis.with_mode("gnb"), cfg["tol"], cfg["threads"])
    coeffs = [cr.solve(sys_.leading(k)).coeffs for k in range(1, n + 1)]
    cc = cr.condition_c_report(coeffs, float(cfg["beta"]))
    rows.append(["condition_c", f"beta={float(cfg['beta'])!r}", cc.value, cc.trend])
    for r in cr.t2_check(CHI, [0.5, 1.0, 2.0, 4.0]):
        rows.append(["t2_chi", f"M={r.m!r}", r.value, ""])
    random_family = not all(isinstance(e, dist.PointMass) for e in fam)
    if random_family and cfg.get("seed") is None:
        raise UsageError("the suffi bound of a random family needs --seed")
    rng = RngStream(int(cfg["seed"] or 0), 0)
    sb = cr.suffi_estimate(basis, int(cfg["samples"]), rng, cfg["threads"])
    rows.append(["suffi_bound", f"stderr={sb.stderr!r}", sb.value, ""])
    if cfg["preset"] == "gamma-kn":
        rate = float(n) if cfg.get("scale") is None else float(cfg["scale"])
        for m, v in cr.gamma_tail_check(rate, float(cfg["beta"]), [2.0, 4.0, 8.0]):
            rows.append(["gamma_tail", f"M={m!r}", v, ""])
    return ["check", "parameter", "value", "flag"], rows, {}


def _cmd_vn(cfg):
    from .zeta import vn_profile

    n = int(cfg["n"])
    fam = cr.preset_family(cfg["preset"], n, cfg.get("scale"), float(cfg["vartheta"]))
    ts = np.linspace(0.0, float(cfg["t_max"]), int(cfg["points"]))
    rows = [[r.t, r.ev, r.stderr, r.bound]
            for r in vn_profile(n, float(cfg["eps"]), fam, ts, int(cfg["samples"]),
                                RngStream(int(cfg["seed"]), 0), cfg["threads"])]
    return ["t", "ev", "stderr", "bound"], rows, {"max_ev": max(r[1] for r in rows)}


COMMANDS = {
    "dist": _cmd_dist,
    "nu": _cmd_nu,
    "gnb": lambda c: _cmd_distance(c, "gnb"),
    "pnb": lambda c: _cmd_distance(c, "pnb"),
    "crosscheck": _cmd_crosscheck,
    "muntz-check": _cmd_muntz,
    "zeta": _cmd_zeta,
    "hypotheses": _cmd_hypotheses,
    "vn": _cmd_vn,
}


# --------------------------------------------------------------------------
# output


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, (np.floating,)):
        return _jsonable(float(v))
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _meta_text(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return v
    return json.dumps(_jsonable(_cell(v)))


def render(cfg, cols, rows, meta) -> str:
    if cfg["format"] == "json":
        doc = {
            "version": __version__,
            "config": cfg,
            "meta": meta,
            "columns": cols,
            "rows": [[_cell(x) if not isinstance(x, float) else float(x) for x in r] for r in rows],
        }
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# beurling-lab {__version__} {cfg['subcommand']}\n")
    buf.write(f"# config: {json.dumps(_jsonable(cfg), sort_keys=True)}\n")
    for k, v in meta.items():
        buf.write(f"# {k}: {_meta_text(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = resolve(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return 2
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", PrecisionWarning)
            cols, rows, meta = COMMANDS[cfg["subcommand"]](cfg)
        notes = sorted({str(w.message) for w in caught if issubclass(w.category, PrecisionWarning)})
        if notes:
            meta = dict(meta, precision_warnings=notes)
        text = render(cfg, cols, rows, meta)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return 2
    except LabError as exc:
        stderr.write(json.dumps(_jsonable(exc.to_dict()), sort_keys=True) + "\n")
        return 3
    if cfg.get("output"):
        Path(cfg["output"]).write_text(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
