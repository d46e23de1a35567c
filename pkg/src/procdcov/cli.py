"""Command-line interface: ``procdcov <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import _accel
from .core import EstimateReport, make_equidistant_grid
from .dcov_alpha import poisson_alpha_dcov
from .dcov_density import distance_correlation, gof_distance, ustat_dcov, vstat_dcov
from .experiments import (
    ExperimentConfig,
    desk_preset,
    figure_config,
    permutation_test,
    run_experiment,
)
from .gaussian_sim import MODEL_KINDS, ProcessModel, simulate_pair_sample
from .io import load_sample, report_row, save_sample, write_reports
from .kernels import WeightKernel
from .selftest import run_selftest
from .szekely import paths_to_vectors, szekely_dcor, szekely_dcov

MODEL_ALIASES = {
    "bm": "BrownianPair",
    "fbm": "FractionalBrownianPair",
    "piecewise": "PiecewiseIidNormalPair",
    **{k: k for k in MODEL_KINDS},
}


def _add_model_args(p, with_rho=True):
    p.add_argument("--model", choices=sorted(MODEL_ALIASES), default="bm", help="process model (default: bm)")
    if with_rho:
        p.add_argument("--rho", type=float, default=0.0, help="cross-correlation (default: 0)")
    p.add_argument("--hurst", type=float, default=0.5, help="Hurst index for fbm (default: 0.5)")
    p.add_argument("--cells", type=int, default=50, help="cells of the piecewise model (default: 50)")


def _model(args, rho=None) -> ProcessModel:
    return ProcessModel(
        MODEL_ALIASES[args.model],
        rho=args.rho if rho is None else rho,
        hurst=args.hurst,
        cells=args.cells,
    )


def _add_kernel_args(p):
    p.add_argument("--alpha-x", type=float, default=2.0, help="kernel exponent for X (default: 2)")
    p.add_argument("--scale-x", type=float, default=0.5, help="kernel scale c for X (default: 0.5)")
    p.add_argument("--alpha-y", type=float, default=None, help="kernel exponent for Y (default: --alpha-x)")
    p.add_argument("--scale-y", type=float, default=None, help="kernel scale c for Y (default: --scale-x)")


def _kernels(args):
    kx = WeightKernel(args.alpha_x, args.scale_x)
    ky = WeightKernel(
        args.alpha_x if args.alpha_y is None else args.alpha_y,
        args.scale_x if args.scale_y is None else args.scale_y,
    )
    return kx, ky


def _emit(reports, output):
    if output:
        write_reports(reports, output)
    else:
        for r in reports:
            print(",".join(report_row(r)))


def cmd_simulate(args):
    model = _model(args)
    grid = make_equidistant_grid(args.mesh)
    sample = simulate_pair_sample(model, args.n, grid, args.seed)
    path = save_sample(sample, args.output, seed=args.seed, model=model.to_dict())
    print(path)


def cmd_estimate(args):
    sample = load_sample(args.input)
    kx, ky = _kernels(args)
    seed = int(sample.metadata.get("seed") or 0)
    params = {
        "alpha_x": kx.alpha, "scale_x": kx.scale, "alpha_y": ky.alpha, "scale_y": ky.scale,
        "variant": args.variant, "n": sample.n, "grid_points": len(sample.grid),
    }
    if args.statistic == "dcov":
        fn = vstat_dcov if args.variant == "V" else ustat_dcov
        reports = [EstimateReport("dcov", fn(sample, kx, ky, workers=args.workers), params, seed)]
    elif args.statistic == "dcor":
        res = distance_correlation(sample, kx, ky, args.variant, workers=args.workers)
        reports = [
            EstimateReport("dcor", res.r, params, seed),
            EstimateReport("dcov_xy", res.t_xy, params, seed),
            EstimateReport("dcov_xx", res.t_xx, params, seed),
            EstimateReport("dcov_yy", res.t_yy, params, seed),
        ]
    else:
        params = {"alpha": kx.alpha, "scale": kx.scale, "n": sample.n}
        reports = [EstimateReport("gof", gof_distance(sample.x_paths, sample.y_paths, kx), params, seed)]
    _emit(reports, args.output)


def cmd_estimate_alpha(args):
    l_n = None if args.l_n == "auto" else int(args.l_n)
    if args.input:
        source, n = load_sample(args.input), None
    else:
        source, n = _model(args), args.n
    est = poisson_alpha_dcov(source, args.alpha, l_n=l_n, seed=args.seed, n=n)
    params = {"alpha": est.alpha, "l_n": est.l_n, "n": est.n}
    if not args.input:
        params["model"] = MODEL_ALIASES[args.model]
        params["rho"] = args.rho
    reports = [
        EstimateReport("alpha_dcov", est.value, params, args.seed),
        EstimateReport("alpha_i1", est.i1_hat, params, args.seed),
        EstimateReport("alpha_i2", est.i2_hat, params, args.seed),
        EstimateReport("alpha_i3", est.i3_hat, params, args.seed),
    ]
    _emit(reports, args.output)


def cmd_estimate_szekely(args):
    sample = load_sample(args.input)
    vs = paths_to_vectors(sample)
    seed = int(sample.metadata.get("seed") or 0)
    params = {"n": sample.n, "dim": len(sample.grid)}
    value = szekely_dcov(vs) if args.statistic == "dcov" else szekely_dcor(vs)
    _emit([EstimateReport(f"szekely_{args.statistic}", value, params, seed)], args.output)


def cmd_experiment(args):
    if args.config:
        with open(args.config) as fh:
            config = ExperimentConfig.from_dict(json.load(fh))
    elif args.figure:
        config = figure_config(args.figure)
    else:
        config = ExperimentConfig()
    if args.desk:
        config = desk_preset(config)
    overrides = {}
    if args.model:
        overrides["model"] = _model(args, rho=0.0)
    for name in ("n", "mesh", "replications", "seed", "workers", "alpha"):
        if getattr(args, name) is not None:
            overrides[name] = getattr(args, name)
    if args.rho_list:
        overrides["rho_list"] = tuple(float(r) for r in args.rho_list.split(","))
    if args.statistics:
        overrides["statistics"] = tuple(args.statistics.split(","))
    if args.l_n:
        overrides["l_n"] = None if args.l_n == "auto" else int(args.l_n)
    overrides["output_dir"] = args.output_dir
    config = replace(config, **overrides)
    tables = run_experiment(config)
    print(f"config_hash={config.config_hash()} output_dir={config.output_dir}")
    for t in tables:
        v = t.values
        ok = v[np.isfinite(v)]
        if ok.size == 0:
            print(f"{t.statistic_name:6s} rho={t.rho:<4g} reps={len(v)} all missing")
            continue
        print(
            f"{t.statistic_name:6s} rho={t.rho:<4g} reps={len(v)} missing={len(v) - ok.size} "
            f"mean={ok.mean():.4f} median={np.median(ok):.4f} "
            f"min={ok.min():.4f} max={ok.max():.4f}"
        )


def cmd_permtest(args):
    sample = load_sample(args.input)
    kx, ky = _kernels(args)
    p = permutation_test(sample, args.statistic, args.B, args.seed, kx, ky, args.variant)
    params = {"statistic": args.statistic, "B": args.B, "n": sample.n, "variant": args.variant}
    _emit([EstimateReport("permutation_p_value", p, params, args.seed)], args.output)


def cmd_selftest(args):
    print(f"backend: {_accel.backend_name()}")
    if not run_selftest():
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="procdcov", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a paired sample and save it")
    _add_model_args(p)
    p.add_argument("-n", type=int, default=100, help="number of path pairs (default: 100)")
    p.add_argument("--mesh", type=int, default=50, help="grid points m, mesh 1/m (default: 50)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="output stem (writes .json, _x.csv, _y.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="distance covariance/correlation of a saved sample")
    p.add_argument("-i", "--input", required=True, help="sample manifest or stem")
    _add_kernel_args(p)
    p.add_argument("--variant", choices=("V", "U"), default="V")
    p.add_argument("--statistic", choices=("dcov", "dcor", "gof"), default="dcor")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output", help="report CSV (appended; default: stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("estimate-alpha", help="Poisson-randomised alpha distance covariance")
    p.add_argument("--alpha", type=float, default=1.0, help="exponent in (0, 2) (default: 1)")
    p.add_argument("--l-n", default="auto", help="number of Poisson grids or 'auto' = ceil(sqrt(n))")
    p.add_argument("-i", "--input", help="sample manifest; otherwise simulate from --model")
    _add_model_args(p)
    p.add_argument("-n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_estimate_alpha)

    p = sub.add_parser("estimate-szekely", help="vector distance covariance/correlation")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--statistic", choices=("dcov", "dcor"), default="dcor")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_estimate_szekely)

    p = sub.add_parser("experiment", help="histogram study over replications and rho values")
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--figure", type=int, choices=(1, 2, 3, 4), help="start from a figure preset")
    p.add_argument("--desk", action="store_true", help="n=50, mesh 1/25, 20 replications")
    p.add_argument("--model", choices=sorted(MODEL_ALIASES))
    p.add_argument("--hurst", type=float, default=0.5)
    p.add_argument("--cells", type=int, default=50)
    p.add_argument("-n", type=int)
    p.add_argument("--mesh", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--rho-list", help="comma separated, e.g. 0,0.5,0.8")
    p.add_argument("--statistics", help="comma separated subset of Rn,RnSz,alpha")
    p.add_argument("--alpha", type=float, help="exponent of the alpha statistic")
    p.add_argument("--l-n")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("-o", "--output-dir", default="experiment-out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("permtest", help="permutation test of independence")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--statistic", choices=("dcor", "dcov", "szekely"), default="dcor")
    p.add_argument("-B", type=int, default=199, help="number of permutations (default: 199)")
    p.add_argument("--seed", type=int, default=0)
    _add_kernel_args(p)
    p.add_argument("--variant", choices=("V", "U"), default="V")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_permtest)

    p = sub.add_parser("selftest", help="oracle-equivalence and identity checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:
        print(f"procdcov {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
