"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 unconverged numerics,
3 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bound import approx_error, norm_factor
from .config import CACHE_ENV, ConfigError, RunConfig, build_config
from .oracle import OracleBudget, verify_suite
from .special import InvalidParameterError, gaussian
from .sweep import compute_curve, curve_stem
from .testfn import ModelParams
from .wightman import boosted_overlap, load_or_build_table

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_UNCONVERGED = 2
EXIT_CONFIG = 3


def _common(p: argparse.ArgumentParser, pairs: bool = True) -> None:
    p.add_argument("--config", help="YAML or JSON file with a flat key mapping")
    p.add_argument("--alpha", type=float, action="append",
                   help="coherent-state amplitude (repeatable)" if pairs else "amplitude")
    p.add_argument("--ratio", type=float, action="append",
                   help="R_det/R_coh, at least 1 (repeatable)" if pairs else "R_det/R_coh")
    p.add_argument("--pdark-min", type=float)
    p.add_argument("--pdark-max", type=float)
    p.add_argument("--pdark-points", type=int)
    p.add_argument("--out-dir")
    p.add_argument("--cache-dir", help=f"overrides ${CACHE_ENV}")
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=None,
                   help="write SVG figures (figure1 only)")
    p.add_argument("--tolerance", type=float, help="quadrature relative tolerance")
    p.add_argument("--eta-max", type=float, help="rapidity cutoff of the overlap table")
    p.add_argument("--workers", type=int, help="processes for table builds")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clickbound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="bound curve for one (alpha, ratio)")
    _common(p, pairs=False)
    p.set_defaults(func=cmd_curve, defaults={"alphas": (1.0,), "r_ratios": (2.0,)})

    p = sub.add_parser("figure1", help="all curves plus the two log-log panels")
    _common(p)
    p.set_defaults(func=cmd_figure1, defaults={})

    p = sub.add_parser("verify", help="compare the main path with brute-force oracles")
    _common(p, pairs=False)
    p.add_argument("--budget-scale", type=float, default=1.0,
                   help="multiply the oracle node counts by this factor")
    p.set_defaults(func=cmd_verify, defaults={"alphas": (1.0,), "r_ratios": (2.0,)})

    p = sub.add_parser("probe", help="print overlaps, errors and norm factors")
    _common(p, pairs=False)
    p.add_argument("--zeta", type=float, nargs="+", default=[1e-2, 1e-1, 1.0, math.pi ** 2, 1e4])
    p.add_argument("--eta", type=float, nargs="+", default=[0.0, 0.1, 0.3, 0.7, 1.5, 3.0])
    p.set_defaults(func=cmd_probe, defaults={"alphas": (1.0,), "r_ratios": (2.0,)})
    return parser


def _config(args) -> RunConfig:
    overrides = {
        "alphas": args.alpha, "r_ratios": args.ratio,
        "pdark_min": args.pdark_min, "pdark_max": args.pdark_max,
        "pdark_points": args.pdark_points, "out_dir": args.out_dir,
        "cache_dir": args.cache_dir, "svg": args.svg, "rtol": args.tolerance,
        "eta_max": args.eta_max, "workers": args.workers,
    }
    return build_config(args.config, overrides, args.defaults)


def _single(cfg: RunConfig) -> ModelParams:
    if len(cfg.alphas) != 1 or len(cfg.r_ratios) != 1:
        raise ConfigError("this command takes a single --alpha and --ratio")
    return ModelParams(cfg.alphas[0], cfg.r_ratios[0])


def _table(params: ModelParams, cfg: RunConfig):
    return load_or_build_table(params, cfg.table_settings(), cfg.resolved_cache_dir(), cfg.workers)


def _curve(params: ModelParams, cfg: RunConfig):
    table = _table(params, cfg)
    curve = compute_curve(table, cfg.pdark_grid(), cfg.zeta_search(),
                          meta={"settings_hash": cfg.settings_hash()})
    csv_path, _ = curve.write(cfg.out_dir, curve_stem(params))
    print(f"wrote {csv_path}")
    if not curve.ok:
        _report_unconverged(curve)
    return curve


def _report_unconverged(curve) -> None:
    t = curve.table
    print(f"unconverged numerics for alpha={curve.params.alpha:g} r={curve.params.r_ratio:g}: "
          f"table converged={t.converged} tail_ok={t.tail_ok} interp_ok={t.interp_ok}; "
          f"{sum(not r.converged for r in curve.rows)} rows unconverged", file=sys.stderr)


def cmd_curve(args, cfg: RunConfig) -> int:
    curve = _curve(_single(cfg), cfg)
    return EXIT_OK if curve.ok else EXIT_UNCONVERGED


def cmd_figure1(args, cfg: RunConfig) -> int:
    from .plotting import plot_lower, plot_upper

    curves = [_curve(ModelParams(a, r), cfg) for r in cfg.r_ratios for a in cfg.alphas]
    if cfg.svg:
        out = Path(cfg.out_dir)
        for path in (plot_upper(curves, out / "figure1_upper.svg"),
                     plot_lower(curves, out / "figure1_lower.svg")):
            print(f"wrote {path}")
    return EXIT_OK if all(c.ok for c in curves) else EXIT_UNCONVERGED


def _fmt(z) -> str:
    z = complex(z)
    return f"{z.real:+.6e}{z.imag:+.6e}j"


def cmd_verify(args, cfg: RunConfig) -> int:
    params = _single(cfg)
    if not args.budget_scale > 0:
        raise ConfigError("--budget-scale must be positive")
    base = OracleBudget()
    budget = base.scaled(args.budget_scale) if args.budget_scale != 1.0 else base
    reports = verify_suite(params, budget)
    reports += [_relabel(r, "alpha=0 ") for r in verify_suite(ModelParams(0.0, params.r_ratio), budget)]
    width = max(len(r.name) for r in reports)
    print(f"{'quantity':<{width}}  {'main':>27}  {'oracle':>27}  {'deviation':>9}  {'tol':>7}  result")
    for r in reports:
        print(f"{r.name:<{width}}  {_fmt(r.main):>27}  {_fmt(r.oracle):>27}  "
              f"{r.deviation:9.2e}  {r.tolerance:7.0e}  {'PASS' if r.passed else 'FAIL'}")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "verify.json"
    path.write_text(json.dumps({"params": params.as_dict(), "budget": budget.as_dict(),
                                "reports": [r.as_dict() for r in reports]}, indent=2) + "\n")
    print(f"wrote {path}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def _relabel(report, prefix):
    return replace(report, name=prefix + report.name)


def cmd_probe(args, cfg: RunConfig) -> int:
    params = _single(cfg)
    spec = cfg.table_settings().spec()
    print(f"alpha={params.alpha:g} r_ratio={params.r_ratio:g}")
    print(f"{'eta':>8}  {'Re W':>14}  {'Im W':>14}  {'error':>9}")
    converged = True
    for eta in args.eta:
        res = boosted_overlap(eta, params, spec)
        converged &= res.converged
        w = complex(res.value)
        print(f"{eta:8.4g}  {w.real:14.7e}  {w.imag:14.7e}  {res.error:9.2e}")

    table = _table(params, cfg)
    p_id = -math.expm1(-table.w0)
    print(f"W0={table.w0:.10e}  P_ideal={p_id:.10e}  sqrt(P_ideal)={math.sqrt(p_id):.10e}")
    print(f"{'zeta':>10}  {'E_zeta':>14}  {'norm':>14}")
    for z in args.zeta:
        print(f"{z:10.4g}  {approx_error(z, table):14.7e}  {norm_factor(z):14.7e}")

    eta = np.linspace(0.0, 3.0, 13)
    phi = table.one_minus_re_exp(eta)
    print("integrand (2G_z - G_2z)(eta) * (1 - Re exp(W - W0)):")
    print(f"{'eta':>8}  " + "  ".join(f"z={z:<10.4g}" for z in args.zeta))
    for e, f in zip(eta, phi):
        vals = [(2 * gaussian(e, z) - gaussian(e, 2 * z)) * f for z in args.zeta]
        print(f"{e:8.3f}  " + "  ".join(f"{v:12.4e}" for v in vals))
    ok = converged and table.ok
    return EXIT_OK if ok else EXIT_UNCONVERGED


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
