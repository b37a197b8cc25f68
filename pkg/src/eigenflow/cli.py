"""Command-line front end.

    eigenflow run     single trajectory -> per-iteration CSV
    eigenflow sweep   ensemble sweep -> trajectory/aggregate/fit CSVs + manifest
    eigenflow fit     rate fit of an aggregate CSV
    eigenflow oracle  closed-form special-case checks

Exit codes: 0 ok/converged, 1 check failed, 2 exhausted, 3 defective,
4 cycling, 64 usage error, 65 malformed input.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .dynamics import PIVOTS, ORTHO_KINDS, Status, TrajectoryConfig, Variant, run_trajectory
from .harness import (
    ExperimentConfig,
    RateFit,
    fit_rate,
    fit_sweep,
    rate_checked_dims,
    run_sweep,
)
from .linalg import ENSEMBLES, EnsembleSpec, sample_matrix
from .oracles import ORACLES, loop_pair
from .errors import EigenflowError, InsufficientData, NonDecaying

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 64
EXIT_DATAERR = 65
STATUS_EXIT = {
    Status.CONVERGED: 0,
    Status.EXHAUSTED: 2,
    Status.DEFECTIVE: 3,
    Status.CYCLING: 4,
}

TRAJECTORY_HEADER = [
    "experiment_id", "variant", "ensemble", "dim", "matrix_index", "seed", "iter",
    "det_gram", "log_neg_log_det", "offdiag_max", "frob_dev", "min_singular", "status",
]
AGGREGATE_HEADER = [
    "variant", "ensemble", "dim", "iter", "mean_lnld", "valid_count",
    "excluded_defective", "excluded_cycling",
]
RATEFIT_HEADER = ["dim", "fitted_t", "conjectured_t", "window_lo", "window_hi", "residual", "slope"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x: float) -> str:
    return repr(float(x))


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            yield fh


def parse_dims(text: str) -> tuple[int, ...]:
    """``"2..8"``, ``"2,3,5"`` or ``"8"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            dims = tuple(range(int(lo), int(hi) + 1))
        else:
            dims = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}")
    if not dims:
        raise argparse.ArgumentTypeError("empty dimension list")
    return dims


def parse_window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}")
    return lo, hi


def trajectory_rows(experiment_id, variant, ensemble, dim, index, seed, records):
    for r in records:
        m = r.metrics
        lnld = "" if r.log_neg_log_det is None else _num(r.log_neg_log_det)
        yield [experiment_id, variant, ensemble, dim, index, seed, r.iter, _num(m.det_gram),
               lnld, _num(m.offdiag_max), _num(m.frob_dev), _num(m.min_singular),
               r.status.value]


def summary_rows(experiment_id, variant, ensemble, s):
    for k in range(len(s.det_gram)):
        lnld = "" if math.isnan(s.lnld[k]) else _num(s.lnld[k])
        yield [experiment_id, variant, ensemble, s.dim, s.index, s.seed, k,
               _num(s.det_gram[k]), lnld, _num(s.offdiag_max[k]), _num(s.frob_dev[k]),
               _num(s.min_singular[k]), s.record_status[k].value]


# -- run -----------------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = TrajectoryConfig(max_iters=args.max_iters, converge_tol=args.converge_tol,
                           ortho_kind=args.ortho_kind, pivot=args.pivot)
    if args.loop_demo:
        initial = loop_pair()[0]
        cfg = TrajectoryConfig(**{**asdict(cfg), "pivot": "last"})
        variant, ensemble, dim = Variant.EIGENBASIS, "loop-demo", 2
    else:
        variant, ensemble, dim = Variant(args.variant), args.ensemble, args.dim
        initial = sample_matrix(EnsembleSpec(ensemble, dim, args.seed))
    traj = run_trajectory(initial, variant, cfg, args.seed)
    exp_id = f"run-{variant.value}-{ensemble}-s{args.seed}"
    with _open_out(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        w.writerows(trajectory_rows(exp_id, variant.value, ensemble, dim, 0, args.seed,
                                    traj.records))
    last = traj.last.metrics
    msg = (f"{traj.final_status.value} after {traj.iterations} iterations: "
           f"det_gram={last.det_gram:.12g} frob_dev={last.frob_dev:.3e}")
    if traj.cycle:
        msg += f" (iterate {traj.cycle.iter} repeats iterate {traj.cycle.matched_iter})"
    if traj.diagnostic:
        msg += f" [{traj.diagnostic}]"
    print(msg, file=sys.stderr)
    return STATUS_EXIT[traj.final_status]


# -- sweep ---------------------------------------------------------------------

def _sweep_config(args) -> ExperimentConfig:
    if args.from_manifest:
        with open(args.from_manifest) as fh:
            return ExperimentConfig.from_dict(json.load(fh)["config_echo"])
    traj = TrajectoryConfig(max_iters=args.max_iters, ortho_kind=args.ortho_kind,
                            pivot=args.pivot)
    return ExperimentConfig(variant=args.variant, ensemble=args.ensemble, dims=args.dims,
                            matrices_per_dim=args.count, max_iters=args.max_iters,
                            base_seed=args.seed, trajectory=traj, workers=args.workers)


def write_aggregate(path, result, include_excluded=False):
    cfg = result.config
    source = result.aggregate_all if include_excluded else result.aggregate
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(AGGREGATE_HEADER)
        for d in cfg.dims:
            series = source[d]
            counts = result.valid_counts[d]
            ex = result.exclusions[d]
            for k, v in enumerate(series):
                valid = int(counts[k]) if not include_excluded and k < len(counts) else ""
                w.writerow([cfg.variant.value, cfg.ensemble, d, k, _num(v), valid,
                            ex["defective"], ex["cycling"]])


def write_fits(path, fits: dict[int, RateFit | str]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RATEFIT_HEADER + ["note"])
        for d, f in fits.items():
            if isinstance(f, RateFit):
                w.writerow([d, _num(f.fitted_t), _num(f.conjectured_t), f.fit_window[0],
                            f.fit_window[1], _num(f.residual), _num(f.slope), ""])
            else:
                w.writerow([d, "", "", "", "", "", "", f])


def cmd_sweep(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    config = _sweep_config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_sweep(config)
    exp_id = f"sweep-{config.variant.value}-{config.ensemble}-s{config.base_seed}"
    outputs = []

    for d in config.dims:
        path = out / f"trajectories_dim{d}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRAJECTORY_HEADER)
            for s in result.per_dim[d]:
                w.writerows(summary_rows(exp_id, config.variant.value, config.ensemble, s))
        outputs.append(path.name)

    write_aggregate(out / "aggregate.csv", result)
    write_aggregate(out / "aggregate_all.csv", result, include_excluded=True)
    fits = fit_sweep(result)
    write_fits(out / "ratefit.csv", fits)
    outputs += ["aggregate.csv", "aggregate_all.csv", "ratefit.csv"]

    summary = {}
    lines = [f"{'dim':>4} {'conv':>5} {'exh':>5} {'def':>4} {'cyc':>4} "
             f"{'conv_frac':>9} {'reach_frac':>10} {'median_det':>12} {'fitted_t':>9} {'conj_t':>6}"]
    for d in config.dims:
        counts = result.status_counts(d)
        f = fits[d]
        summary[d] = {
            "counts": counts,
            "converged_fraction": result.converged_fraction(d),
            "reached_fraction": result.reached_fraction(d),
            "median_final_det": result.median_final_det(d),
            "fit": asdict(f) if isinstance(f, RateFit) else f,
        }
        ft = f"{f.fitted_t:9.3f}" if isinstance(f, RateFit) else f"{'-':>9}"
        ct = f"{f.conjectured_t:6.1f}" if isinstance(f, RateFit) else f"{'-':>6}"
        lines.append(f"{d:>4} {counts['converged']:>5} {counts['exhausted']:>5} "
                     f"{counts['defective']:>4} {counts['cycling']:>4} "
                     f"{result.converged_fraction(d):9.3f} {result.reached_fraction(d):10.3f} "
                     f"{result.median_final_det(d):12.6g} {ft} {ct}")
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, default=str)
    outputs.append("summary.json")

    manifest = {
        "tool_version": __version__,
        "config_echo": config.to_dict(),
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs + ["manifest.json"],
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    print("\n".join(lines))
    return EXIT_OK


# -- fit -----------------------------------------------------------------------

def read_aggregate(path) -> dict[tuple[str, int], list[float]]:
    """Series keyed by (variant, dim); raises ValueError on malformed input."""
    groups: dict[tuple[str, int], dict[int, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"variant", "dim", "iter", "mean_lnld"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"missing columns {sorted(missing)}")
        for row in reader:
            key = (row["variant"], int(row["dim"]))
            groups.setdefault(key, {})[int(row["iter"])] = float(row["mean_lnld"])
    series = {}
    for key, pts in groups.items():
        if sorted(pts) != list(range(len(pts))):
            raise ValueError(f"iterations for {key} are not contiguous from 0")
        series[key] = [pts[k] for k in range(len(pts))]
    if not series:
        raise ValueError("no data rows")
    return series


def cmd_fit(args) -> int:
    try:
        series = read_aggregate(args.input)
        Variant(next(iter(series))[0])
    except (OSError, ValueError, KeyError) as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    ok = True
    print("dim fitted_t conjectured_t residual")
    for (variant, d), ys in sorted(series.items(), key=lambda kv: kv[0][1]):
        checked = d in rate_checked_dims(variant)
        try:
            f = fit_rate(ys, args.window, dim=d, variant=variant)
        except (InsufficientData, NonDecaying) as exc:
            print(f"{d} - - - ({exc})")
            ok = ok and not checked
            continue
        flag = ""
        if checked and f.deviation > args.tol:
            ok = False
            flag = "  <- outside tolerance"
        print(f"{d} {f.fitted_t:.6f} {f.conjectured_t:.1f} {f.residual:.3e}{flag}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# -- oracle --------------------------------------------------------------------

def cmd_oracle(args) -> int:
    names = list(ORACLES) if args.which == "all" else [args.which]
    first_failure = None
    for name in names:
        fn = ORACLES[name]
        kwargs = {"steps": args.steps} if args.steps and name in ("t1", "tn", "t3", "special2") else {}
        try:
            rep = fn(**kwargs)
        except EigenflowError as exc:
            print(f"FAIL {name}: {type(exc).__name__}: {exc}")
            first_failure = first_failure or f"{name}: {exc}"
            continue
        print(rep.line())
        if not rep.passed and first_failure is None:
            first_failure = f"{name}: {rep.failure}"
    if first_failure:
        print(f"first failing check: {first_failure}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eigenflow", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--ensemble", choices=ENSEMBLES, default="gaussian")
        sp.add_argument("--variant", choices=[v.value for v in Variant], default="eigenbasis")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-iters", type=int, default=2000)
        sp.add_argument("--ortho-kind", choices=ORTHO_KINDS, default="real-orthogonal")
        sp.add_argument("--pivot", choices=PIVOTS, default="max",
                        help="eigenvector phase convention (default: canonical)")

    r = sub.add_parser("run", help="run one trajectory")
    common(r)
    r.add_argument("--dim", type=int, default=3)
    r.add_argument("--converge-tol", type=float, default=1e-10)
    r.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    r.add_argument("--loop-demo", action="store_true",
                   help="start from the 2x2 loop pair with last-entry sign convention")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="ensemble sweep over dimensions")
    common(s)
    s.add_argument("--dims", type=parse_dims, default=(2, 3, 4, 5, 6))
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--out-dir", default="sweep_out")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--from-manifest", default=None,
                   help="rerun the config_echo of an earlier manifest.json")
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("fit", help="fit decay rates of an aggregate CSV")
    f.add_argument("--in", dest="input", required=True)
    f.add_argument("--window", type=parse_window, default=None)
    f.add_argument("--tol", type=float, default=0.5)
    f.set_defaults(func=cmd_fit)

    o = sub.add_parser("oracle", help="verify the closed-form special cases")
    o.add_argument("--which", choices=list(ORACLES) + ["all"], default="all")
    o.add_argument("--steps", type=int, default=None)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"eigenflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
