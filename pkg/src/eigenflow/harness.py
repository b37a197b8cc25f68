"""Seeded ensemble sweeps, log(-log det) aggregation and decay-rate fits."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dynamics import Status, TrajectoryConfig, Variant, run_trajectory
from .errors import InsufficientData, NonDecaying
from .linalg import ENSEMBLES, EnsembleSpec, sample_matrix

log = logging.getLogger(__name__)

DIM_CAP = 16
EXCLUDED = (Status.DEFECTIVE, Status.CYCLING)
CONVERGED_DET = 1.0 - 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    variant: Variant = Variant.EIGENBASIS
    ensemble: str = "gaussian"
    dims: tuple[int, ...] = (2, 3, 4, 5, 6)
    matrices_per_dim: int = 100
    max_iters: int = 2000
    base_seed: int = 0
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    workers: int | None = None
    dim_cap: int = DIM_CAP

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if not self.dims or min(self.dims) < 2:
            raise ValueError("dims must be nonempty and all >= 2")
        if max(self.dims) > self.dim_cap:
            raise ValueError(f"dims above the cap {self.dim_cap}")
        if self.matrices_per_dim < 1:
            raise ValueError("matrices_per_dim must be >= 1")
        # one source of truth for the iteration budget
        if self.trajectory.max_iters != self.max_iters:
            object.__setattr__(self, "trajectory",
                               replace(self.trajectory, max_iters=self.max_iters))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        d["dims"] = list(self.dims)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["trajectory"] = TrajectoryConfig(**d.get("trajectory", {}))
        d["dims"] = tuple(d["dims"])
        return cls(**d)


def trajectory_seed(base_seed: int, dim: int, index: int) -> int:
    """Stable 64-bit seed; independent across dimensions and indices."""
    ss = np.random.SeedSequence([int(base_seed), int(dim), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class TrajectorySummary:
    """Per-iteration metric columns of one trajectory (numpy arrays)."""

    dim: int
    index: int
    seed: int
    status: Status
    det_gram: np.ndarray
    lnld: np.ndarray  # NaN where log(-log det) is undefined
    offdiag_max: np.ndarray
    frob_dev: np.ndarray
    min_singular: np.ndarray
    record_status: list[Status]
    diagnostic: str = ""

    @property
    def iterations(self) -> int:
        return len(self.det_gram) - 1

    @property
    def final_det(self) -> float:
        return float(self.det_gram[-1])

    @property
    def excluded(self) -> bool:
        return self.status in EXCLUDED


def summarize(traj, dim: int, index: int, seed: int) -> TrajectorySummary:
    recs = traj.records
    return TrajectorySummary(
        dim=dim, index=index, seed=seed, status=traj.final_status,
        det_gram=np.array([r.metrics.det_gram for r in recs]),
        lnld=np.array([np.nan if r.log_neg_log_det is None else r.log_neg_log_det
                       for r in recs]),
        offdiag_max=np.array([r.metrics.offdiag_max for r in recs]),
        frob_dev=np.array([r.metrics.frob_dev for r in recs]),
        min_singular=np.array([r.metrics.min_singular for r in recs]),
        record_status=[r.status for r in recs],
        diagnostic=traj.diagnostic,
    )


def _run_one(task) -> TrajectorySummary:
    config, dim, index = task
    seed = trajectory_seed(config.base_seed, dim, index)
    initial = sample_matrix(EnsembleSpec(config.ensemble, dim, seed))
    traj = run_trajectory(initial, config.variant, config.trajectory, seed)
    return summarize(traj, dim, index, seed)


def worker_count(requested: int | None = None) -> int:
    if requested:
        return max(1, int(requested))
    env = os.environ.get("EIGENFLOW_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class SweepResult:
    config: ExperimentConfig
    per_dim: dict[int, list[TrajectorySummary]]
    aggregate: dict[int, np.ndarray]
    aggregate_all: dict[int, np.ndarray]
    valid_counts: dict[int, np.ndarray]
    exclusions: dict[int, dict[str, int]]

    def status_counts(self, dim: int) -> dict[str, int]:
        counts = {s.value: 0 for s in Status if s is not Status.RUNNING}
        for t in self.per_dim[dim]:
            counts[t.status.value] += 1
        return counts

    def included(self, dim: int) -> list[TrajectorySummary]:
        return [t for t in self.per_dim[dim] if not t.excluded]

    def converged_fraction(self, dim: int) -> float:
        """Fraction of non-excluded trajectories with status converged."""
        inc = self.included(dim)
        return sum(t.status is Status.CONVERGED for t in inc) / len(inc) if inc else float("nan")

    def reached_fraction(self, dim: int, threshold: float = CONVERGED_DET) -> float:
        """Fraction of non-excluded trajectories whose det_gram ever exceeds ``threshold``."""
        inc = self.included(dim)
        if not inc:
            return float("nan")
        return sum(bool(np.any(t.det_gram > threshold)) for t in inc) / len(inc)

    def median_final_det(self, dim: int) -> float:
        return float(np.median([t.final_det for t in self.included(dim)]))

    def iterations_to_convergence(self, dim: int) -> np.ndarray:
        """Iteration of convergence per trajectory; ``max_iters + 1`` when never converged."""
        cap = self.config.max_iters + 1
        return np.array([t.iterations if t.status is Status.CONVERGED else cap
                         for t in self.per_dim[dim]])


def _aggregate(trajs: list[TrajectorySummary]):
    """Mean lnld per iteration under the 50%-validity rule, plus valid counts."""
    if not trajs:
        return np.empty(0), np.empty(0, dtype=int)
    length = max(len(t.lnld) for t in trajs)
    grid = np.full((len(trajs), length), np.nan)
    for i, t in enumerate(trajs):
        grid[i, :len(t.lnld)] = t.lnld
    valid = np.isfinite(grid)
    counts = valid.sum(axis=0)
    ok = counts * 2 >= len(trajs)
    stop = int(np.argmin(ok)) if not ok.all() else length
    sums = np.where(valid, grid, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = sums[:stop] / counts[:stop]
    return mean, counts[:stop]


def build_result(config: ExperimentConfig, summaries) -> SweepResult:
    per_dim: dict[int, list[TrajectorySummary]] = {d: [] for d in config.dims}
    for s in summaries:
        per_dim[s.dim].append(s)
    for d in per_dim:
        per_dim[d].sort(key=lambda s: s.index)
    aggregate, aggregate_all, valid_counts, exclusions = {}, {}, {}, {}
    for d, trajs in per_dim.items():
        included = [t for t in trajs if not t.excluded]
        aggregate[d], valid_counts[d] = _aggregate(included)
        aggregate_all[d], _ = _aggregate(trajs)
        exclusions[d] = {
            "defective": sum(t.status is Status.DEFECTIVE for t in trajs),
            "cycling": sum(t.status is Status.CYCLING for t in trajs),
        }
    return SweepResult(config, per_dim, aggregate, aggregate_all, valid_counts, exclusions)


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Run ``matrices_per_dim`` trajectories for every dimension.

    Results do not depend on the worker count or completion order.
    """
    tasks = [(config, d, i) for d in config.dims for i in range(config.matrices_per_dim)]
    workers = min(worker_count(config.workers), len(tasks))
    log.info("sweep: %d trajectories on %d worker(s)", len(tasks), workers)
    if workers <= 1:
        summaries = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    return build_result(config, summaries)


def aggregate_lnld(result: SweepResult, dim: int, include_excluded: bool = False) -> np.ndarray:
    """Mean of log(-log det_gram) per iteration, truncated by the 50% rule."""
    if dim not in result.per_dim:
        raise KeyError(f"dimension {dim} not in sweep")
    series = (result.aggregate_all if include_excluded else result.aggregate)[dim]
    if series.size == 0:
        raise InsufficientData(f"no iteration of dim {dim} has >= 50% valid log(-log det)")
    return series


# -- rate fitting --------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    dim: int
    fitted_t: float
    conjectured_t: float
    fit_window: tuple[int, int]
    residual: float
    slope: float

    @property
    def deviation(self) -> float:
        return abs(self.fitted_t - self.conjectured_t)


def conjectured_t(variant, dim: int) -> float:
    """Conjectured exponent t in slope -2^-t; NaN when no rate is claimed."""
    variant = Variant(variant)
    if variant is Variant.EIGENBASIS:
        return float(dim - 2)
    if variant is Variant.PRODUCT:
        return float(dim - 3)
    return float("nan")


def rate_checked_dims(variant) -> range:
    """Dimensions for which the rate law is conjectured."""
    return range(3, 7) if Variant(variant) is Variant.PRODUCT else (
        range(2, 7) if Variant(variant) is Variant.EIGENBASIS else range(0))


def default_window(series_len: int) -> tuple[int, int]:
    last = series_len - 1
    return int(np.floor(0.1 * last)), int(np.floor(0.8 * last))


def fit_rate(series, window: tuple[int, int] | None = None, dim: int = 0,
             variant=Variant.EIGENBASIS) -> RateFit:
    """Least-squares slope s of ``series[k]`` against ``k``; ``t = log2(-1/s)``."""
    series = np.asarray(series, dtype=float)
    lo, hi = window if window is not None else default_window(len(series))
    hi = min(hi, len(series) - 1)
    if hi - lo + 1 < 10:
        raise InsufficientData(f"fit window [{lo}, {hi}] has fewer than 10 points")
    k = np.arange(lo, hi + 1, dtype=float)
    y = series[lo:hi + 1]
    if not np.all(np.isfinite(y)):
        raise InsufficientData("series has non-finite values inside the fit window")
    slope, intercept = np.polyfit(k, y, 1)
    if slope >= 0:
        raise NonDecaying(f"slope {slope:.3g} is not negative")
    resid = float(np.sqrt(np.mean((y - (slope * k + intercept)) ** 2)))
    return RateFit(dim=dim, fitted_t=float(np.log2(-1.0 / slope)),
                   conjectured_t=conjectured_t(variant, dim),
                   fit_window=(lo, hi), residual=resid, slope=float(slope))


def fit_sweep(result: SweepResult) -> dict[int, RateFit | str]:
    """RateFit per dimension, or the reason a fit was impossible."""
    out: dict[int, RateFit | str] = {}
    for d in result.config.dims:
        try:
            out[d] = fit_rate(aggregate_lnld(result, d), dim=d, variant=result.config.variant)
        except (InsufficientData, NonDecaying) as exc:
            out[d] = f"{type(exc).__name__}: {exc}"
    return out
