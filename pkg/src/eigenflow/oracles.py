"""Closed-form special cases of the extrusion map, used as exact oracles.

Four constrained families are covered:

``t1-2x2``
    ``[[1, cos t], [0, sin t]]`` with ``t`` in the fourth quadrant. The
    constrained successor angle is ``-pi/4 + t/2``; limit ``diag(1, -1)``.
``tn-lastcol``
    identity with last column ``x``, ``sum x_i^2 = 1``, ``x_i >= 0`` for
    ``i < n`` and ``x_n < 0``. The direction of ``x_1..x_{n-1}`` is preserved
    and the last angle follows the ``t1-2x2`` recursion; limit
    ``diag(1, ..., 1, -1)``.
``t3-3x3``
    ``[[1, 0, a], [0, -1, b], [0, 0, i c]]`` with ``|a|^2+|b|^2+c^2 = 1``,
    ``c`` real. ``|a|/|b|`` and ``arg a + arg b`` are preserved, and
    ``tan^2`` of the last angle maps ``s -> 1 + 2 s``; limit ``diag(1, -1, i)``.
``special-2x2``
    ``[[cos t1, cos t2], [sin t1, sin t2]]`` with ``t1`` in the first and
    ``t2`` in the fourth quadrant. ``t1`` decreases, ``|t2|`` increases;
    limit ``diag(1, -1)``.

The numerical path (:func:`constrained_extrusion_step`) runs the general
eigensolver and only afterwards picks each eigenvector's sign/phase so the
result stays in the family.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dynamics import Status, TrajectoryConfig, run_trajectory
from .errors import ConstraintViolation, DomainViolation, QuadrantViolation
from .linalg import eigendecompose, fro, gram_metrics

log = logging.getLogger(__name__)

HALF_PI = np.pi / 2
QUARTER_PI = np.pi / 4
KINDS = ("t1-2x2", "tn-lastcol", "t3-3x3", "special-2x2")

_STRUCT_TOL = 1e-12
_NORM_TOL = 1e-10
_SIGN_TOL = 1e-14
# absolute angle slack (radians) when checking inequalities on computed angles
ANGLE_SLACK = 1e-14


# -- closed forms --------------------------------------------------------------

def t1_angle_step(theta: float) -> float:
    """Successor of the fourth-quadrant angle: ``-pi/4 + theta/2``."""
    if not (-HALF_PI <= theta <= 0.0):
        raise QuadrantViolation(f"theta={theta!r} outside [-pi/2, 0]")
    return -QUARTER_PI + theta / 2.0


def t1_limit() -> np.ndarray:
    return np.diag([1.0, -1.0]).astype(np.complex128)


def tn_limit(n: int) -> np.ndarray:
    d = np.ones(n)
    d[-1] = -1.0
    return np.diag(d).astype(np.complex128)


def t3_limit() -> np.ndarray:
    return np.diag([1.0, -1.0, 1j])


def special2_limit() -> np.ndarray:
    return t1_limit()


def tn_angles(x) -> tuple[np.ndarray, float]:
    """Split a last column into (unit direction of the head, last angle)."""
    x = np.asarray(x, dtype=float)
    head = x[:-1]
    r = float(np.linalg.norm(head))
    direction = head / r if r > 0 else np.zeros_like(head)
    return direction, float(np.arctan2(x[-1], r))


def tn_successor(x) -> np.ndarray:
    """Closed-form constrained successor of a ``tn-lastcol`` last column."""
    direction, phi = tn_angles(x)
    phi_next = t1_angle_step(phi)
    return np.append(np.cos(phi_next) * direction, np.sin(phi_next))


def t3_tan2_step(s: float) -> float:
    return 1.0 + 2.0 * s


def t3_tan2_sequence(count: int, start: float = 0.0) -> np.ndarray:
    """``tan^2`` of the first ``count`` successors, starting from ``tan^2 = start``."""
    out = np.empty(count)
    s = start
    for k in range(count):
        s = t3_tan2_step(s)
        out[k] = s
    return out


def t3_successor(a: complex, b: complex, c: float):
    """Closed-form constrained eigenvector ``(x, y, z)`` for eigenvalue ``i c``.

    Solves ``a z i = x (c i - 1)`` and ``b z i = y (c i + 1)`` with
    ``|x|^2 + |y|^2 + z^2 = 1`` and ``z > 0``. The norm condition reduces to
    ``cos^2`` of the last angle halving each step.
    """
    cos2 = (abs(a) ** 2 + abs(b) ** 2) / 2.0
    z = float(np.sqrt(1.0 - cos2))
    x = a * z * 1j / (c * 1j - 1.0)
    y = b * z * 1j / (c * 1j + 1.0)
    return complex(x), complex(y), z


# -- the families --------------------------------------------------------------

@dataclass(frozen=True)
class TriangularFamily:
    """One member of a constrained family; ``params`` depends on ``kind``.

    ``t1-2x2``: ``[theta]``; ``tn-lastcol``: the last column; ``t3-3x3``:
    ``[a, b, c]`` (complex array, ``c`` real); ``special-2x2``: ``[t1, t2]``.
    """

    kind: str
    params: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConstraintViolation(f"unknown family {self.kind!r}")
        object.__setattr__(self, "params", np.asarray(self.params))
        self._check()

    @classmethod
    def t1(cls, theta: float) -> "TriangularFamily":
        return cls("t1-2x2", np.array([float(theta)]))

    @classmethod
    def tn(cls, last_column) -> "TriangularFamily":
        return cls("tn-lastcol", np.asarray(last_column, dtype=float))

    @classmethod
    def t3(cls, a: complex, b: complex, c: float) -> "TriangularFamily":
        return cls("t3-3x3", np.array([a, b, c], dtype=np.complex128))

    @classmethod
    def special2(cls, theta1: float, theta2: float) -> "TriangularFamily":
        return cls("special-2x2", np.array([float(theta1), float(theta2)]))

    def _check(self):
        p = self.params
        if self.kind == "t1-2x2":
            if p.shape != (1,):
                raise ConstraintViolation("t1-2x2 takes one angle")
            if not (-HALF_PI <= p[0] <= 0.0):
                raise ConstraintViolation(f"t1 angle {p[0]!r} not in fourth quadrant")
        elif self.kind == "tn-lastcol":
            if p.ndim != 1 or p.size < 2:
                raise ConstraintViolation("tn-lastcol needs a last column of length >= 2")
            if abs(float(p @ p) - 1.0) > _NORM_TOL:
                raise ConstraintViolation("last column is not unit norm")
            if np.any(p[:-1] < -_SIGN_TOL) or not p[-1] < 0:
                raise ConstraintViolation("need x_i >= 0 for i < n and x_n < 0")
        elif self.kind == "t3-3x3":
            if p.shape != (3,):
                raise ConstraintViolation("t3-3x3 takes (a, b, c)")
            if abs(p[2].imag) > _STRUCT_TOL:
                raise ConstraintViolation("c must be real")
            if abs(float(np.sum(np.abs(p) ** 2)) - 1.0) > _NORM_TOL:
                raise ConstraintViolation("|a|^2 + |b|^2 + c^2 != 1")
        else:
            if p.shape != (2,):
                raise ConstraintViolation("special-2x2 takes (theta1, theta2)")
            t1, t2 = p
            if not (0.0 <= t1 < HALF_PI) or not (-HALF_PI <= t2 <= 0.0):
                raise ConstraintViolation(
                    f"angles ({t1!r}, {t2!r}) leave first/fourth quadrants")

    @property
    def dim(self) -> int:
        return {"t1-2x2": 2, "t3-3x3": 3, "special-2x2": 2}.get(self.kind, self.params.size)

    def matrix(self) -> np.ndarray:
        p = self.params
        if self.kind == "t1-2x2":
            t = p[0]
            m = [[1.0, np.cos(t)], [0.0, np.sin(t)]]
        elif self.kind == "tn-lastcol":
            m = np.eye(p.size)
            m[:, -1] = p
        elif self.kind == "t3-3x3":
            a, b, c = p
            m = [[1, 0, a], [0, -1, b], [0, 0, 1j * c.real]]
        else:
            t1, t2 = p
            m = [[np.cos(t1), np.cos(t2)], [np.sin(t1), np.sin(t2)]]
        return np.asarray(m, dtype=np.complex128)

    def limit(self) -> np.ndarray:
        if self.kind == "t1-2x2":
            return t1_limit()
        if self.kind == "tn-lastcol":
            return tn_limit(self.params.size)
        if self.kind == "t3-3x3":
            return t3_limit()
        return special2_limit()

    @classmethod
    def from_matrix(cls, kind: str, x) -> "TriangularFamily":
        """Read family parameters off a matrix, checking its fixed structure."""
        x = np.asarray(x, dtype=np.complex128)
        if kind == "t3-3x3":
            frame = np.array([[1, 0], [0, -1], [0, 0]])
            if x.shape != (3, 3) or fro(x[:, :2] - frame) > _STRUCT_TOL or abs(x[2, 2].real) > _STRUCT_TOL:
                raise ConstraintViolation("matrix is not of the t3-3x3 form")
            return cls.t3(x[0, 2], x[1, 2], x[2, 2].imag)
        if np.abs(x.imag).max() > _STRUCT_TOL:
            raise ConstraintViolation(f"{kind} members are real")
        x = x.real
        if kind == "special-2x2":
            return cls.special2(np.arctan2(x[1, 0], x[0, 0]), np.arctan2(x[1, 1], x[0, 1]))
        n = x.shape[0]
        if fro(x[:, :-1] - np.eye(n)[:, :-1]) > _STRUCT_TOL:
            raise ConstraintViolation(f"matrix is not of the {kind} form")
        if kind == "t1-2x2":
            return cls.t1(np.arctan2(x[1, 1], x[0, 1]))
        return cls.tn(x[:, -1])


def _nearest(values: np.ndarray, target: complex) -> int:
    return int(np.argmin(np.abs(values - target)))


def _quadrant_sign(v: np.ndarray, first: bool) -> np.ndarray:
    """Sign-fix a real 2-vector into the first (or fourth) quadrant."""
    if abs(v[1]) >= abs(v[0]):
        flip = (v[1] < 0) if first else (v[1] > 0)
    else:
        flip = v[0] < 0
    return -v if flip else v


def constrained_eigenvectors(f: TriangularFamily, residual_tol: float = 1e-8) -> np.ndarray:
    """Eigenvector matrix of ``f.matrix()`` with the family's sign/phase choice."""
    a = f.matrix()
    dec = eigendecompose(a, residual_tol)
    w, v = dec.values, dec.vectors
    n = a.shape[0]

    if f.kind in ("t1-2x2", "tn-lastcol"):
        xn = a[-1, -1].real
        if abs(xn - 1.0) <= _STRUCT_TOL:
            raise ConstraintViolation("last eigenvalue coincides with 1")
        j = _nearest(w, xn)
        rest = [k for k in range(n) if k != j]
        # the eigenvalue-1 eigenspace must be span(e_1, ..., e_{n-1})
        if rest and np.abs(v[-1, rest]).max() > _STRUCT_TOL:
            raise ConstraintViolation("eigenvalue-1 eigenspace left span(e_1..e_{n-1})")
        y = v[:, j] * (-np.conj(v[-1, j]) / abs(v[-1, j]))
        x = np.eye(n, dtype=np.complex128)
        x[:, -1] = y
        return x

    if f.kind == "t3-3x3":
        c = a[2, 2].imag
        x = np.empty((3, 3), dtype=np.complex128)
        for col, (target, want) in enumerate([(1.0, 1.0), (-1.0, -1.0), (1j * c, 1j)]):
            k = _nearest(w, target)
            vec = v[:, k]
            p = vec[col]
            if abs(p) == 0:
                raise ConstraintViolation("eigenvector has no component on its own axis")
            x[:, col] = vec * (want * np.conj(p) / abs(p))
        return x

    # special-2x2: one positive and one negative real eigenvalue
    if np.abs(w.imag).max() > _STRUCT_TOL or np.abs(v.imag).max() > _STRUCT_TOL:
        raise ConstraintViolation("special-2x2 eigenpairs must be real")
    w, v = w.real, v.real
    jp, jm = int(np.argmax(w)), int(np.argmin(w))
    if not (w[jp] > 0 > w[jm]):
        raise ConstraintViolation("special-2x2 needs eigenvalues of opposite sign")
    x = np.column_stack([_quadrant_sign(v[:, jp], True), _quadrant_sign(v[:, jm], False)])
    return x.astype(np.complex128)


def constrained_extrusion_step(f: TriangularFamily, residual_tol: float = 1e-8) -> TriangularFamily:
    """Numerical successor: general eigensolver plus the family's constraint."""
    return TriangularFamily.from_matrix(f.kind, constrained_eigenvectors(f, residual_tol))


# -- special 2x2 bounds --------------------------------------------------------

@dataclass(frozen=True)
class Special2Bounds:
    tan_theta3_upper: float
    tan_abs_theta4_lower: float
    # lower bound on tan(theta1) - tan(theta3); None when delta/cos(theta1) >= 1
    decrement_lower: float | None


def special2x2_bounds(theta1: float, theta2: float) -> Special2Bounds:
    """Gerschgorin-derived bounds on the successor angles of a special 2x2 matrix."""
    if not (0.0 < theta1 < QUARTER_PI):
        raise DomainViolation(f"theta1={theta1!r} not in (0, pi/4)")
    if not (-HALF_PI < theta2 < -QUARTER_PI):
        raise DomainViolation(f"theta2={theta2!r} not in (-pi/2, -pi/4)")
    if abs(theta1 - HALF_PI - theta2) <= 1e-12:
        raise DomainViolation("theta1 - pi/2 == theta2: the matrix is already orthogonal")
    s1, c1 = np.sin(theta1), np.cos(theta1)
    s2, c2 = np.sin(theta2), np.cos(theta2)
    upper = s1 / (c1 - s1 - s2)
    lower = (-s2 - c2 + c1) / c2
    delta = -s2 - s1
    ratio = delta / c1
    if ratio < 1.0:
        dec = float(np.tan(theta1) * (ratio - ratio ** 2))
    else:
        log.debug("series bound skipped: delta/cos(theta1) = %.3g >= 1", ratio)
        dec = None
    return Special2Bounds(float(upper), float(lower), dec)


# -- loop and discontinuity examples ------------------------------------------

def loop_pair() -> tuple[np.ndarray, np.ndarray]:
    """Two upper triangular matrices that are eigenvector matrices of each other."""
    h = np.sqrt(3.0) / 2.0
    a = np.array([[1.0, h], [0.0, 0.5]], dtype=np.complex128)
    b = np.array([[1.0, -h], [0.0, 0.5]], dtype=np.complex128)
    for m, other in ((a, b), (b, a)):
        if fro(m @ other - other @ np.diag([1.0, 0.5])) > 1e-14:
            raise AssertionError("loop pair eigen-relation failed")
    return a, b


def discontinuity_pair(eps: float):
    """Near-identity ``[[1, eps], [0, sqrt(1 - eps^2)]]`` and its decomposition.

    The matrix is within ``eps`` of the identity, yet its eigenvector matrix
    stays near ``[[1, +-1], [0, 0]]``.
    """
    if not (0.0 < eps < 0.1):
        raise DomainViolation("eps must lie in (0, 0.1)")
    m = np.array([[1.0, eps], [0.0, np.sqrt(1.0 - eps * eps)]], dtype=np.complex128)
    dec = eigendecompose(m)
    second = int(np.argmax(np.abs(dec.vectors[1])))
    if abs(dec.vectors[0, second]) < 1.0 - eps:
        raise AssertionError("second eigenvector did not collapse onto e1")
    return m, dec


# -- oracle checks -------------------------------------------------------------

@dataclass
class OracleReport:
    name: str
    steps_checked: int = 0
    max_angle_error: float = 0.0
    limit_error: float = 0.0
    passed: bool = True
    failure: str = ""

    def fail(self, what: str):
        if self.passed:
            self.passed = False
            self.failure = what

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        text = (f"{mark} {self.name}: steps={self.steps_checked} "
                f"max_angle_error={self.max_angle_error:.3e} limit_error={self.limit_error:.3e}")
        return text + (f" ({self.failure})" if self.failure else "")


def check_t1(steps: int = 50, starts=None, tol: float = 1e-12,
             limit_tol: float = 1e-10) -> OracleReport:
    rep = OracleReport("t1")
    starts = starts if starts is not None else np.linspace(-1.5, -0.05, 7)
    for theta0 in starts:
        f = TriangularFamily.t1(theta0)
        closed = theta0
        for _ in range(steps):
            prev = f.params[0]
            f = constrained_extrusion_step(f)
            closed = t1_angle_step(closed)
            err = max(abs(f.params[0] - t1_angle_step(prev)), abs(f.params[0] - closed))
            rep.max_angle_error = max(rep.max_angle_error, err)
            rep.steps_checked += 1
        rep.limit_error = max(rep.limit_error, fro(f.matrix() - t1_limit()))
    if rep.max_angle_error > tol:
        rep.fail(f"angle recursion mismatch {rep.max_angle_error:.3e} > {tol:g}")
    if rep.limit_error > limit_tol:
        rep.fail(f"limit error {rep.limit_error:.3e} > {limit_tol:g}")
    return rep


def random_tn(n: int, rng: np.random.Generator) -> TriangularFamily:
    u = np.abs(rng.standard_normal(n - 1))
    u /= np.linalg.norm(u)
    phi = -rng.uniform(0.05, HALF_PI - 0.05)
    return TriangularFamily.tn(np.append(np.cos(phi) * u, np.sin(phi)))


def check_tn(dims=(4, 6), steps: int = 50, seed: int = 0, trials: int = 5,
             ratio_tol: float = 1e-12, limit_tol: float = 1e-8) -> OracleReport:
    rep = OracleReport("tn")
    rng = np.random.default_rng(seed)
    ratio_err = 0.0
    for n in dims:
        for _ in range(trials):
            f = random_tn(n, rng)
            u0, _ = tn_angles(f.params)
            for _ in range(steps):
                _, phi = tn_angles(f.params)
                f = constrained_extrusion_step(f)
                u, phi_next = tn_angles(f.params)
                ratio_err = max(ratio_err, float(np.abs(u - u0).max()))
                rep.max_angle_error = max(rep.max_angle_error, abs(phi_next - t1_angle_step(phi)))
                rep.steps_checked += 1
            rep.limit_error = max(rep.limit_error, fro(f.matrix() - tn_limit(n)))
    if ratio_err > ratio_tol:
        rep.fail(f"head direction drifted by {ratio_err:.3e} > {ratio_tol:g}")
    if rep.max_angle_error > 1e-12:
        rep.fail(f"last-angle recursion mismatch {rep.max_angle_error:.3e}")
    if rep.limit_error > limit_tol:
        rep.fail(f"limit error {rep.limit_error:.3e} > {limit_tol:g}")
    return rep


def random_t3(rng: np.random.Generator) -> TriangularFamily:
    th1 = rng.uniform(0.1, HALF_PI - 0.1)
    th2 = rng.uniform(-HALF_PI + 0.1, HALF_PI - 0.1)
    al, be = rng.uniform(-np.pi, np.pi, 2)
    return TriangularFamily.t3(np.cos(th1) * np.cos(th2) * np.exp(1j * al),
                               np.sin(th1) * np.cos(th2) * np.exp(1j * be),
                               np.sin(th2))


def _wrap(angle: float) -> float:
    return float((angle + np.pi) % (2 * np.pi) - np.pi)


def check_t3(steps: int = 64, seed: int = 0, trials: int = 5, count: int = 41,
             seq_tol: float = 1e-10, limit_tol: float = 1e-8) -> OracleReport:
    """Closed-form tan^2 sequence plus numerical iteration of the 3x3 family."""
    rep = OracleReport("t3")
    seq = t3_tan2_sequence(count)
    expected = 2.0 ** (np.arange(count) + 1) - 1.0
    seq_err = float(np.max(np.abs(seq - expected) / expected))
    if seq_err > seq_tol:
        rep.fail(f"tan^2 sequence off by relative {seq_err:.3e}")

    rng = np.random.default_rng(seed)
    starts = [TriangularFamily.t3(np.sqrt(0.5), np.sqrt(0.5) * 1j, 0.0)]
    starts += [random_t3(rng) for _ in range(trials)]
    invariant_err = 0.0
    for f in starts:
        a0, b0, _ = f.params
        ratio0 = abs(a0) / abs(b0)
        phase0 = np.angle(a0) + np.angle(b0)
        for _ in range(steps):
            a, b, c = f.params
            x, y, z = t3_successor(a, b, c.real)
            f = constrained_extrusion_step(f)
            xa, ya, za = f.params
            # closed-form successor vs numerics, entrywise relative to the entry sizes
            scale = max(abs(x), abs(y), 1e-300)
            rep.max_angle_error = max(rep.max_angle_error,
                                      max(abs(xa - x), abs(ya - y)) / scale, abs(za.real - z))
            invariant_err = max(invariant_err,
                                abs(abs(xa) / abs(ya) - ratio0) / ratio0,
                                abs(_wrap(np.angle(xa) + np.angle(ya) - phase0)))
            rep.steps_checked += 1
        rep.limit_error = max(rep.limit_error, fro(f.matrix() - t3_limit()))
    if rep.max_angle_error > 1e-10:
        rep.fail(f"closed-form successor mismatch {rep.max_angle_error:.3e}")
    if invariant_err > 1e-10:
        rep.fail(f"|x|/|y| or phase sum drifted by {invariant_err:.3e}")
    if rep.limit_error > limit_tol:
        rep.fail(f"limit error {rep.limit_error:.3e} > {limit_tol:g}")
    return rep


def random_special2(rng: np.random.Generator) -> TriangularFamily:
    while True:
        t1 = rng.uniform(0.0, QUARTER_PI)
        t2 = rng.uniform(-HALF_PI, -QUARTER_PI)
        if 0 < t1 and t2 > -HALF_PI and abs(t1 - HALF_PI - t2) > 1e-6:
            return TriangularFamily.special2(t1, t2)


def check_special2(samples: int = 100, steps: int = 200, seed: int = 0,
                   limit_tol: float = 1e-8) -> OracleReport:
    """Bounds and monotonicity along numerically iterated special 2x2 matrices.

    Checks stop for a sample once it is within 1e-12 of ``diag(1, -1)`` or
    of orthogonality; past that point the angles no longer move in floating
    point and the bounds' domain excludes the matrix.
    """
    rep = OracleReport("special2")
    rng = np.random.default_rng(seed)
    limit = special2_limit()
    for _ in range(samples):
        f = random_special2(rng)
        for _ in range(steps):
            t1, t2 = f.params
            if fro(f.matrix() - limit) < 1e-12 or abs(t1 - HALF_PI - t2) <= 1e-12:
                break
            bounds = special2x2_bounds(t1, t2)
            f = constrained_extrusion_step(f)
            t3, t4 = f.params
            rep.steps_checked += 1
            # compared as angles: near -pi/2 the tangent amplifies rounding by 1/cos
            over = t3 - np.arctan(bounds.tan_theta3_upper)
            under = np.arctan(bounds.tan_abs_theta4_lower) - abs(t4)
            rep.max_angle_error = max(rep.max_angle_error, over, under)
            if over > ANGLE_SLACK:
                rep.fail(f"tan(theta3) above bound at theta=({t1}, {t2})")
            if under > ANGLE_SLACK:
                rep.fail(f"tan|theta4| below bound at theta=({t1}, {t2})")
            if not (t3 < t1 and abs(t4) > abs(t2)):
                rep.fail(f"not strictly monotone at theta=({t1}, {t2})")
        rep.limit_error = max(rep.limit_error, fro(f.matrix() - limit))
    if rep.limit_error > limit_tol:
        rep.fail(f"limit error {rep.limit_error:.3e} > {limit_tol:g}")
    return rep


def check_loop(config: TrajectoryConfig | None = None) -> OracleReport:
    """The loop pair cycles when eigenvectors are sign-fixed on their last entry."""
    rep = OracleReport("loop")
    a, b = loop_pair()
    for m in (a, b):
        g = gram_metrics(m)
        rep.max_angle_error = max(rep.max_angle_error, abs(g.det_gram - 0.25))
    if rep.max_angle_error > 1e-14:
        rep.fail("loop pair det_gram != 1/4")
    base = config or TrajectoryConfig()
    cfg = TrajectoryConfig(**{**base.__dict__, "pivot": "last"})
    traj = run_trajectory(a, "eigenbasis", cfg)
    rep.steps_checked = traj.iterations
    rep.limit_error = traj.cycle.distance if traj.cycle else float("inf")
    if traj.final_status is not Status.CYCLING:
        rep.fail(f"expected cycling, got {traj.final_status.value}")
    elif traj.iterations > 2 * cfg.cycle_window:
        rep.fail(f"cycle detected only at iteration {traj.iterations}")
    return rep


def check_discontinuity(eps: float = 1e-6) -> OracleReport:
    rep = OracleReport("discontinuity")
    m, dec = discontinuity_pair(eps)
    off = gram_metrics(dec.vectors).offdiag_max
    dist = fro(m - np.eye(2))
    rep.steps_checked = 1
    rep.limit_error = dist
    rep.max_angle_error = 1.0 - off
    if not off > 0.9:
        rep.fail(f"offdiag_max {off:.3g} <= 0.9")
    if not dist < 2 * eps:
        rep.fail(f"input {dist:.3g} from identity, expected < {2 * eps:g}")
    return rep


ORACLES = {
    "t1": check_t1,
    "tn": check_tn,
    "t3": check_t3,
    "special2": check_special2,
    "loop": check_loop,
    "discontinuity": check_discontinuity,
}
