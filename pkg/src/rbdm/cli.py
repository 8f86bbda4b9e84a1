"""Command-line front end: ``rbdm --input cpi.csv --log --out-dir out``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .gibbs import HyperParams
from .io import RunConfig, run_analysis, write_series_csv, write_tails
from .synthetic import KINDS, generate_synthetic


def build_parser():
    p = argparse.ArgumentParser(
        prog="rbdm",
        description="Robust Bayesian linear growth model: outliers and "
                    "structural breaks in a univariate time series.")
    io = p.add_argument_group("data")
    io.add_argument("--input", help="CSV file with a header row")
    io.add_argument("--date-col", default="date")
    io.add_argument("--value-col", default="value")
    io.add_argument("--log", action="store_true", help="model log(values)")
    io.add_argument("--annual", action="store_true",
                    help="dates are YYYY instead of YYYY-MM")

    prior = p.add_argument_group("prior and sampler")
    prior.add_argument("--nu", type=float, default=4.0,
                       help="Student-t degrees of freedom")
    prior.add_argument("--nu-state", type=float, default=None,
                       help="separate degrees of freedom for the state weights")
    prior.add_argument("--p", type=float, default=1.0)
    prior.add_argument("--q", type=float, default=1.0)
    prior.add_argument("--inv-beta", type=float, default=10000.0,
                       help="1/beta of the scaled Beta2 precision prior")
    prior.add_argument("--iters", type=int, default=30000,
                       help="retained sweeps after burn-in (before thinning)")
    prior.add_argument("--burn", type=int, default=10000)
    prior.add_argument("--thin", type=int, default=1)
    prior.add_argument("--seed", type=int, default=0)
    prior.add_argument("--chains", type=int, default=1)

    rep = p.add_argument_group("reporting")
    rep.add_argument("--level", type=float, default=0.95,
                     help="credible interval probability")
    rep.add_argument("--threshold", type=float, default=0.5,
                     help="flag weights whose posterior mean is below this")
    rep.add_argument("--slope-threshold", type=float, default=None)
    rep.add_argument("--top-k", type=int, default=15)
    rep.add_argument("--out-dir", default="rbdm_out")
    rep.add_argument("--emit-tails", action="store_true",
                     help="also write prior tail comparison data (tails.csv)")

    syn = p.add_argument_group("synthetic data")
    syn.add_argument("--generate-synthetic", choices=KINDS, default=None,
                     help="simulate a series, write it with its ground truth, "
                          "then fit it")
    syn.add_argument("--synthetic-length", type=int, default=120)
    syn.add_argument("--magnitude", type=float, default=None)
    syn.add_argument("--break-time", type=int, default=None,
                     help="1-based time of the injected anomaly")
    syn.add_argument("--no-fit", action="store_true",
                     help="with --generate-synthetic, only write the data")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> RunConfig:
    hyper = HyperParams(nu=args.nu, p=args.p, q=args.q, beta=1.0 / args.inv_beta,
                        n_iter=args.iters, n_burn=args.burn, thin=args.thin,
                        seed=args.seed, nu_state=args.nu_state)
    return RunConfig(input=args.input, date_col=args.date_col,
                     value_col=args.value_col, log=args.log, annual=args.annual,
                     hyper=hyper, level=args.level, threshold=args.threshold,
                     slope_threshold=args.slope_threshold, top_k=args.top_k,
                     out_dir=args.out_dir, chains=args.chains,
                     emit_tails=args.emit_tails)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    out = Path(config.out_dir)

    if args.generate_synthetic:
        try:
            series, truth = generate_synthetic(
                args.generate_synthetic, args.synthetic_length, args.magnitude,
                args.seed, args.break_time)
        except ValueError as exc:
            parser.error(str(exc))
        out.mkdir(parents=True, exist_ok=True)
        data_path = out / "synthetic.csv"
        write_series_csv(data_path, series, config.date_col, config.value_col)
        with open(out / "truth.json", "w") as fh:
            json.dump(truth, fh, indent=2)
            fh.write("\n")
        if args.no_fit:
            return 0
        config.input = str(data_path)
        config.annual = False
    elif config.input is None:
        if args.emit_tails:
            out.mkdir(parents=True, exist_ok=True)
            write_tails(out / "tails.csv")
            return 0
        parser.error("--input is required unless --generate-synthetic or "
                     "--emit-tails alone is given")
    return run_analysis(config)


if __name__ == "__main__":
    sys.exit(main())
