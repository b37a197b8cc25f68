"""Fraction of trajectories that become unitary, per dimension and ensemble.

    python3 scripts/convergence_by_dimension.py --dims 2..8 --count 100
"""
import argparse

from eigenflow.cli import parse_dims
from eigenflow.harness import ExperimentConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=parse_dims, default=(2, 3, 4, 5, 6, 7, 8))
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--max-iters", type=int, default=2000)
    ap.add_argument("--ensembles", default="gaussian,uniform01")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'ensemble':>10} {'dim':>4} {'reached':>8} {'median_det':>11} {'cycling':>8} {'defective':>9}")
    for ens in args.ensembles.split(","):
        res = run_sweep(ExperimentConfig(ensemble=ens, dims=args.dims, matrices_per_dim=args.count,
                                         max_iters=args.max_iters, base_seed=args.seed))
        for d in args.dims:
            ex = res.exclusions[d]
            print(f"{ens:>10} {d:>4} {res.reached_fraction(d):8.2f} "
                  f"{res.median_final_det(d):11.6f} {ex['cycling']:>8} {ex['defective']:>9}")


if __name__ == "__main__":
    main()
