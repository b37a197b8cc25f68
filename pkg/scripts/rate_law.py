"""Fit the decay exponent t of mean log(-log det) for each variant.

    python3 scripts/rate_law.py --count 200 --variants eigenbasis,product
"""
import argparse

from eigenflow.cli import parse_dims
from eigenflow.harness import ExperimentConfig, RateFit, fit_sweep, run_sweep

BUDGET = {"eigenbasis": 2000, "similarity": 2000, "product": 600}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=parse_dims, default=(2, 3, 4, 5, 6))
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--variants", default="eigenbasis,product")
    ap.add_argument("--pivot", default="max", choices=["max", "last", "native"])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for variant in args.variants.split(","):
        cfg = ExperimentConfig(variant=variant, dims=args.dims, matrices_per_dim=args.count,
                               max_iters=BUDGET[variant], base_seed=args.seed)
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(),
                                          "trajectory": {**cfg.to_dict()["trajectory"],
                                                         "pivot": args.pivot}})
        fits = fit_sweep(run_sweep(cfg))
        print(f"# {variant} (pivot={args.pivot}, {args.count} matrices)")
        for d, f in fits.items():
            if isinstance(f, RateFit):
                print(f"  n={d}  t={f.fitted_t:6.3f}  conjectured={f.conjectured_t:4.1f}  "
                      f"window={f.fit_window}  rms={f.residual:.3f}")
            else:
                print(f"  n={d}  {f}")


if __name__ == "__main__":
    main()
