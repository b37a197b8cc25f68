"""Dense complex matrix helpers: ensembles, column normalization, Gram metrics
and a canonicalized general eigendecomposition.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_matrix`
is the single entry point that validates shape and finiteness.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NonFinite,
    NotNormalized,
    NotSquare,
    NumericalFailure,
    ResidualExceeded,
    UnsupportedDim,
    ZeroColumn,
)

COLUMN_FLOOR = 1e-300
DEFAULT_RESIDUAL_TOL = 1e-8
PIVOT_TIE_TOL = 1e-12
MAGNITUDE_TIE_TOL = 1e-12

ENSEMBLES = (
    "uniform01",
    "gaussian",
    "complex-ginibre",
    "haar-orthogonal",
    "haar-unitary",
    "upper-triangular-constrained",
)


def fro(x) -> float:
    """Frobenius norm (cheaper than ``np.linalg.norm`` for small matrices)."""
    return float(np.sqrt(np.vdot(x, x).real))


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square, finite complex128 array (copying only if needed)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotSquare(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NonFinite("matrix has NaN or Inf entries")
    return a


def normalize_columns(m) -> np.ndarray:
    """Scale every column to unit L2 norm."""
    a = as_matrix(m)
    norms = np.sqrt((a.real ** 2 + a.imag ** 2).sum(axis=0))
    bad = np.flatnonzero(norms <= COLUMN_FLOOR)
    if bad.size:
        raise ZeroColumn(f"column(s) {bad.tolist()} have norm <= {COLUMN_FLOOR:g}")
    return a / norms


def has_unit_columns(m, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    norms = np.sqrt((np.abs(m) ** 2).sum(axis=0))
    return bool((np.abs(norms - 1.0) <= tol).all())


# -- phase / order canonicalization -------------------------------------------

def pivot_rows(v: np.ndarray, pivot: str = "max", mags: np.ndarray | None = None) -> np.ndarray:
    """Row index used to fix each column's phase.

    ``"max"`` picks the largest-magnitude entry (lowest index on ties within
    1e-12). ``"last"`` picks the last entry that is not negligible relative to
    the column maximum; it reproduces the sign convention under which the
    2x2 loop pair maps onto itself.
    """
    if mags is None:
        mags = np.abs(v)
    top = mags.max(axis=0)
    if pivot == "max":
        return (mags >= top - PIVOT_TIE_TOL).argmax(axis=0)
    if pivot == "last":
        live = mags > PIVOT_TIE_TOL * np.maximum(top, 1.0)
        return v.shape[0] - 1 - live[::-1].argmax(axis=0)
    raise ValueError(f"unknown pivot convention {pivot!r}")


def canonicalize_phase(v, pivot: str = "max") -> np.ndarray:
    """Rotate each column so its pivot entry is real and nonnegative."""
    v = np.array(v, dtype=np.complex128, copy=True)
    mags = np.abs(v)
    rows = pivot_rows(v, pivot, mags)
    cols = np.arange(v.shape[1])
    p = v[rows, cols]
    mag = mags[rows, cols]
    safe = mag > 0
    v *= np.where(safe, p.conj() / np.where(safe, mag, 1.0), 1.0)
    # exact real pivot; rounding in conj(p)/|p| * p can leave ~1e-17 imag
    v[rows, cols] = mag
    return v


def eigenvalue_order(values: np.ndarray) -> np.ndarray:
    """Permutation sorting by descending magnitude, then ascending phase in (-pi, pi]."""
    values = np.asarray(values)
    mags = np.abs(values)
    phases = np.angle(values)
    phases[phases <= -np.pi] = np.pi
    order = np.lexsort((phases, -mags)).tolist()
    m = mags.tolist()
    ph = phases.tolist()
    # magnitudes equal up to rounding are ties, so group them before the phase sort
    out = []
    i, n = 0, len(order)
    while i < n:
        ref = m[order[i]]
        tol = MAGNITUDE_TIE_TOL * max(1.0, ref)
        j = i + 1
        while j < n and ref - m[order[j]] <= tol:
            j += 1
        group = order[i:j]
        if len(group) > 1:
            group.sort(key=ph.__getitem__)
        out.extend(group)
        i = j
    return np.asarray(out, dtype=np.intp)


@dataclass(frozen=True)
class Eigendecomposition:
    values: np.ndarray
    vectors: np.ndarray
    residual: float

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


def canonicalize(values, vectors, pivot: str = "max"):
    """Canonical (values, vectors): unit columns, fixed phase, sorted eigenvalues."""
    vectors = canonicalize_phase(normalize_columns(vectors), pivot)
    order = eigenvalue_order(np.asarray(values))
    return np.asarray(values)[order], vectors[:, order]


def eigendecompose(a, residual_tol: float = DEFAULT_RESIDUAL_TOL,
                   pivot: str = "max") -> Eigendecomposition:
    """General (non-Hermitian) eigendecomposition in canonical form.

    ``pivot`` selects the phase convention (see :func:`pivot_rows`);
    ``"native"`` keeps the LAPACK order and phase and only normalizes.

    Raises :class:`ResidualExceeded` when ``||A V - V diag(w)||_F`` exceeds
    ``residual_tol * (1 + ||A||_F)``.
    """
    if residual_tol <= 0:
        raise ValueError("residual_tol must be positive")
    a = as_matrix(a)
    try:
        w, v = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    if not (np.isfinite(w).all() and np.isfinite(v).all()):
        raise NumericalFailure("eigensolver returned non-finite output")
    if pivot == "native":
        # solver's own order and phase; for convention experiments only
        v = normalize_columns(v)
    else:
        w, v = canonicalize(w, v, pivot)
    residual = fro(a @ v - v * w)
    bound = residual_tol * (1.0 + fro(a))
    if residual > bound:
        raise ResidualExceeded(f"residual {residual:.3e} exceeds {bound:.3e}")
    return Eigendecomposition(values=w, vectors=v, residual=residual)


# -- unitarity metrics ---------------------------------------------------------

@dataclass(frozen=True)
class GramMetrics:
    det_gram: float
    offdiag_max: float
    frob_dev: float
    min_singular: float
    # -log det(X^H X), kept separately because 1 - det_gram underflows first
    neg_log_det: float

    @property
    def log_neg_log_det(self) -> float | None:
        if 0.0 < self.det_gram < 1.0 and self.neg_log_det > 0.0:
            return float(np.log(self.neg_log_det))
        return None


def gram_metrics(x) -> GramMetrics:
    """Unitarity metrics of a unit-column matrix, from ``X^H X`` and singular values."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[0]
    g = x.conj().T @ x
    diag = g.diagonal().real
    if np.any(np.abs(diag - 1.0) > 1e-8):
        raise NotNormalized("columns are not unit norm (Gram diagonal off by > 1e-8)")
    s = np.linalg.svd(x, compute_uv=False)
    smin = float(s[-1])
    if smin > 0.0:
        nld = float(-2.0 * np.sum(np.log(s)))
        det = float(np.exp(-nld))
    else:
        nld = float("inf")
        det = 0.0
    det = min(max(det, 0.0), 1.0)
    dev = g - np.eye(n)
    frob = fro(dev)
    np.fill_diagonal(dev, 0.0)
    offdiag_max = float(np.abs(dev).max()) if n > 1 else 0.0
    return GramMetrics(det_gram=det, offdiag_max=offdiag_max, frob_dev=frob,
                       min_singular=smin, neg_log_det=max(nld, 0.0))


# -- random ensembles ----------------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    dim: int
    seed: int

    def __post_init__(self):
        if self.kind not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.kind!r}; choose from {ENSEMBLES}")


def haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar(n: int, rng: np.random.Generator, kind: str = "real-orthogonal") -> np.ndarray:
    if kind == "real-orthogonal":
        return haar_orthogonal(n, rng)
    if kind == "complex-unitary":
        return haar_unitary(n, rng)
    raise ValueError(f"unknown ortho kind {kind!r}")


def sample_matrix(spec: EnsembleSpec) -> np.ndarray:
    """Draw one matrix; ``(kind, dim, seed)`` fully determines the result."""
    n = spec.dim
    if n < 2:
        raise UnsupportedDim(f"dim must be >= 2, got {n}")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "uniform01":
        m = rng.random((n, n))
    elif spec.kind == "gaussian":
        m = rng.standard_normal((n, n))
    elif spec.kind == "complex-ginibre":
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    elif spec.kind == "haar-orthogonal":
        m = haar_orthogonal(n, rng)
    elif spec.kind == "haar-unitary":
        m = haar_unitary(n, rng)
    else:
        # identity with last column (cos(phi) u, sin(phi)), u >= 0 unit, phi in (-pi/2, 0)
        u = np.abs(rng.standard_normal(n - 1))
        u /= np.linalg.norm(u)
        phi = -np.pi / 2 * (1.0 - rng.random())
        m = np.eye(n)
        m[:-1, -1] = np.cos(phi) * u
        m[-1, -1] = np.sin(phi)
    return np.asarray(m, dtype=np.complex128)
