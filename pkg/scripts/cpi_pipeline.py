"""Fit the bundled CPI-like series with the default hyperparameters and print
the ranked events per family.

    python scripts/cpi_pipeline.py [--iters N] [--burn N] [--out-dir DIR]
"""
import argparse
import json
from pathlib import Path

from rbdm.io import RunConfig, run_analysis
from rbdm.gibbs import HyperParams

DATA = Path(__file__).resolve().parents[1] / "src" / "rbdm" / "data" / "cpi_like.csv"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--iters", type=int, default=30000)
    ap.add_argument("--burn", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=2012)
    ap.add_argument("--out-dir", default="cpi_out")
    args = ap.parse_args()
    cfg = RunConfig(input=str(DATA), log=True, out_dir=args.out_dir, emit_tails=True,
                    hyper=HyperParams(n_iter=args.iters, n_burn=args.burn, seed=args.seed))
    code = run_analysis(cfg)
    if code:
        raise SystemExit(code)
    summary = json.loads((Path(args.out_dir) / "summary.json").read_text())
    print(f"T={summary['T']}  draws={summary['n_draws']}  "
          f"{summary['runtime_seconds']:.1f}s")
    for family, rows in summary["top_k"].items():
        print(f"\n{family}")
        for r in rows[:8]:
            mark = "*" if r["flagged"] else " "
            print(f"  {r['rank']:2d} {r['timestamp']}  {r['omega_mean']:.4f} {mark}")


if __name__ == "__main__":
    main()
