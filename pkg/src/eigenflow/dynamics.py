"""The eigen-extrusion map, its two randomized variants, and trajectory runs.

One step replaces a matrix by its canonical unit-column eigenvector matrix
``Z``. The similarity variant then returns ``Q Z Q^H`` and the product variant
``Q Z`` for a fresh Haar-random ``Q``. Metrics are always taken on ``Z``
(or on the normalized initial matrix at iteration 0).
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import EigenflowError, UnsupportedDim
from .linalg import (
    DEFAULT_RESIDUAL_TOL,
    GramMetrics,
    as_matrix,
    canonicalize_phase,
    eigendecompose,
    fro,
    gram_metrics,
    haar,
    has_unit_columns,
    normalize_columns,
)


class Variant(str, enum.Enum):
    EIGENBASIS = "eigenbasis"
    SIMILARITY = "similarity"
    PRODUCT = "product"


class Status(str, enum.Enum):
    RUNNING = "running"
    CONVERGED = "converged"
    DEFECTIVE = "defective"
    CYCLING = "cycling"
    EXHAUSTED = "exhausted"


ORTHO_KINDS = ("real-orthogonal", "complex-unitary")
PIVOTS = ("max", "last", "native")

# a repeat only counts as a cycle if it is this much closer than frob_dev,
# which rules out slow geometric convergence towards a unitary limit
CYCLE_PROGRESS_RATIO = 1e-3


@dataclass(frozen=True)
class TrajectoryConfig:
    max_iters: int = 2000
    converge_tol: float = 1e-10
    defect_tol: float = 1e-12
    cycle_window: int = 8
    cycle_tol: float = 1e-9
    ortho_kind: str = "real-orthogonal"
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    # eigenvector phase convention: "max" (canonical), "last" or "native"
    pivot: str = "max"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        for name in ("converge_tol", "defect_tol", "cycle_tol", "residual_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.cycle_window < 2:
            raise ValueError("cycle_window must be >= 2")
        if self.ortho_kind not in ORTHO_KINDS:
            raise ValueError(f"ortho_kind must be one of {ORTHO_KINDS}")
        if self.pivot not in PIVOTS:
            raise ValueError(f"pivot must be one of {PIVOTS}")


@dataclass(frozen=True)
class TrajectoryRecord:
    iter: int
    metrics: GramMetrics
    log_neg_log_det: float | None
    status: Status


@dataclass(frozen=True)
class CycleMatch:
    iter: int
    matched_iter: int
    distance: float


@dataclass
class Trajectory:
    config: TrajectoryConfig
    variant: Variant
    initial: np.ndarray
    records: list[TrajectoryRecord]
    final_status: Status
    final_matrix: np.ndarray
    pre_normalized: bool = False
    diagnostic: str = ""
    cycle: CycleMatch | None = None

    @property
    def last(self) -> TrajectoryRecord:
        return self.records[-1]

    @property
    def iterations(self) -> int:
        return self.records[-1].iter


def canonical_form(x) -> np.ndarray:
    """Representative of ``x`` modulo column phases and column order.

    Columns are phase-fixed (largest entry real, nonnegative), then sorted
    lexicographically by their interleaved (real, imag) entries.
    """
    v = canonicalize_phase(x)
    keys = np.empty((2 * v.shape[0], v.shape[1]))
    keys[0::2] = v.real
    keys[1::2] = v.imag
    # np.lexsort treats the last key as primary
    order = np.lexsort(keys[::-1])
    return v[:, order]


def _extrude(a: np.ndarray, variant: Variant, rng: np.random.Generator | None,
             ortho_kind: str, residual_tol: float, pivot: str):
    z = eigendecompose(a, residual_tol, pivot).vectors
    if variant is Variant.EIGENBASIS:
        return z, z
    if rng is None:
        raise ValueError(f"variant {variant.value} needs a random stream")
    q = haar(a.shape[0], rng, ortho_kind)
    if variant is Variant.SIMILARITY:
        return z, q @ z @ q.conj().T
    return z, q @ z


def step(a, variant=Variant.EIGENBASIS, q_source: np.random.Generator | None = None,
         ortho_kind: str = "real-orthogonal", residual_tol: float = DEFAULT_RESIDUAL_TOL,
         pivot: str = "max") -> np.ndarray:
    """One application of the map. No normalization is applied after ``Q``."""
    variant = Variant(variant)
    return _extrude(as_matrix(a), variant, q_source, ortho_kind, residual_tol, pivot)[1]


def q_stream(seed: int) -> np.random.Generator:
    """Random stream for the per-iteration Haar factors of a trajectory."""
    return np.random.default_rng([int(seed), 0x51])


def run_trajectory(initial, variant=Variant.EIGENBASIS,
                   config: TrajectoryConfig | None = None, seed: int = 0) -> Trajectory:
    """Iterate the map from ``initial`` until a terminal status.

    Terminal checks, in order, at every iterate k (k = 0 is the initial matrix):
    converged (frob_dev < converge_tol), defective (min_singular < defect_tol),
    cycling (canonical form within cycle_tol of an iterate 2..cycle_window
    steps back, and much closer than the iterate's own frob_dev),
    exhausted (k == max_iters).
    """
    config = config or TrajectoryConfig()
    variant = Variant(variant)
    a = as_matrix(initial)
    if a.shape[0] < 2:
        raise UnsupportedDim("trajectories need dim >= 2")
    rng = q_stream(seed) if variant is not Variant.EIGENBASIS else None

    pre_normalized = not has_unit_columns(a)
    measured = normalize_columns(a) if pre_normalized else a
    current = a
    history: deque[np.ndarray] = deque(maxlen=config.cycle_window)
    records: list[TrajectoryRecord] = []
    diagnostic = ""
    cycle = None

    k = 0
    while True:
        m = gram_metrics(measured)
        status = Status.RUNNING
        if m.frob_dev < config.converge_tol:
            status = Status.CONVERGED
        elif m.min_singular < config.defect_tol:
            status = Status.DEFECTIVE
        else:
            canon = canonical_form(measured)
            # lag-1 matches are skipped: an invertible unit-column matrix that is
            # its own eigenvector matrix up to gauge is diagonal, hence unitary
            for lag in range(2, len(history) + 1):
                d = fro(canon - history[-lag])
                if d < config.cycle_tol and d <= CYCLE_PROGRESS_RATIO * m.frob_dev:
                    status = Status.CYCLING
                    cycle = CycleMatch(iter=k, matched_iter=k - lag, distance=d)
                    break
            history.append(canon)
            if status is Status.RUNNING and k >= config.max_iters:
                status = Status.EXHAUSTED
        records.append(TrajectoryRecord(k, m, m.log_neg_log_det, status))
        if status is not Status.RUNNING:
            break
        try:
            measured, current = _extrude(current, variant, rng, config.ortho_kind,
                                         config.residual_tol, config.pivot)
        except EigenflowError as exc:
            diagnostic = f"step {k + 1} failed: {type(exc).__name__}: {exc}"
            last = records[-1]
            records[-1] = TrajectoryRecord(last.iter, last.metrics,
                                           last.log_neg_log_det, Status.DEFECTIVE)
            break
        k += 1

    return Trajectory(config=config, variant=variant, initial=a, records=records,
                      final_status=records[-1].status, final_matrix=measured,
                      pre_normalized=pre_normalized, diagnostic=diagnostic, cycle=cycle)
