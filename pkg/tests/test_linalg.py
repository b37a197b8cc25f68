import numpy as np
import pytest
from hypothesis import given, strategies as st

from eigenflow import linalg
from eigenflow.errors import (
    NonFinite, NotNormalized, NotSquare, NumericalFailure, ResidualExceeded,
    UnsupportedDim, ZeroColumn,
)
from eigenflow.linalg import (
    ENSEMBLES, EnsembleSpec, canonicalize, eigendecompose, gram_metrics,
    normalize_columns, sample_matrix,
)

seeds = st.integers(min_value=0, max_value=2**64 - 1)
dims = st.integers(min_value=2, max_value=7)


def random_phases(n, rng):
    return np.diag(np.exp(1j * rng.uniform(-np.pi, np.pi, n)))


# -- normalize_columns ----------------------------------------------------------

def test_normalize_identity_is_identity():
    np.testing.assert_array_equal(normalize_columns(np.eye(3)), np.eye(3))


def test_normalize_diagonal_rescale():
    np.testing.assert_array_equal(normalize_columns([[2, 0], [0, 0.5]]), np.eye(2))


def test_normalize_hand_computed():
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(normalize_columns([[1, 1], [0, 1]]), [[1, r], [0, r]], atol=1e-15)


def test_normalize_rejects_zero_column():
    with pytest.raises(ZeroColumn):
        normalize_columns([[1, 0], [0, 0]])


def test_as_matrix_validation():
    with pytest.raises(NotSquare):
        linalg.as_matrix(np.ones((2, 3)))
    with pytest.raises(NonFinite):
        linalg.as_matrix([[1, np.nan], [0, 1]])


@given(seeds, dims)
def test_normalized_gram_diagonal_is_one(seed, n):
    m = sample_matrix(EnsembleSpec("complex-ginibre", n, seed))
    x = normalize_columns(m)
    np.testing.assert_allclose(np.diag(x.conj().T @ x).real, 1.0, atol=1e-14)


# -- eigendecompose ------------------------------------------------------------

def test_eig_diagonal():
    dec = eigendecompose(np.diag([2.0, 3.0]))
    np.testing.assert_array_equal(dec.values, [3, 2])
    np.testing.assert_array_equal(dec.vectors, [[0, 1], [1, 0]])


def test_eig_loop_matrix_second_vector():
    h = np.sqrt(3) / 2
    dec = eigendecompose([[1, h], [0, 0.5]])
    np.testing.assert_allclose(dec.values, [1, 0.5], atol=1e-15)
    v = dec.vectors[:, 1]
    # proportional to (sqrt(3), -1)/2; the canonical phase makes the big entry positive
    np.testing.assert_allclose(v, [h, -0.5], atol=1e-15)


def test_eig_haar_orthogonal_is_orthonormal():
    q = sample_matrix(EnsembleSpec("haar-orthogonal", 5, 7))
    v = eigendecompose(q).vectors
    assert np.linalg.norm(v.conj().T @ v - np.eye(5)) < 1e-10


def test_eig_ordering_ties_by_phase():
    vals = np.array([1j, -1.0, 1.0, -1j, 0.5])
    order = linalg.eigenvalue_order(vals)
    np.testing.assert_array_equal(vals[order], [-1j, 1.0, 1j, -1.0, 0.5])


def test_eig_residual_failure(monkeypatch):
    def bad_eig(a):
        return np.array([1.0, 2.0]), np.eye(2)
    monkeypatch.setattr(np.linalg, "eig", bad_eig)
    with pytest.raises(ResidualExceeded):
        eigendecompose([[0.0, 1.0], [1.0, 0.0]])


def test_eig_backend_failure(monkeypatch):
    def broken(a):
        raise np.linalg.LinAlgError("did not converge")
    monkeypatch.setattr(np.linalg, "eig", broken)
    with pytest.raises(NumericalFailure):
        eigendecompose(np.eye(2))


def test_eig_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        eigendecompose(np.eye(2), residual_tol=0.0)


@given(seeds, dims, st.sampled_from(ENSEMBLES))
def test_eig_invariants(seed, n, kind):
    a = sample_matrix(EnsembleSpec(kind, n, seed))
    dec = eigendecompose(a)
    v = dec.vectors
    np.testing.assert_allclose(np.linalg.norm(v, axis=0), 1.0, atol=1e-12)
    assert dec.residual <= 1e-8 * (1 + np.linalg.norm(a))
    assert np.linalg.norm(a @ v - v @ np.diag(dec.values)) <= 1e-8 * (1 + np.linalg.norm(a))
    # canonical phase: pivot real and nonnegative
    rows = linalg.pivot_rows(v)
    piv = v[rows, np.arange(n)]
    assert np.all(piv.imag == 0) and np.all(piv.real >= 0)
    # canonical order: nonincreasing magnitude up to the tie tolerance
    mags = np.abs(dec.values)
    assert np.all(np.diff(mags) <= 1e-12 * np.maximum(1, mags[:-1]))


@given(seeds, dims)
def test_canonicalization_is_idempotent(seed, n):
    a = sample_matrix(EnsembleSpec("complex-ginibre", n, seed))
    dec = eigendecompose(a)
    w2, v2 = canonicalize(dec.values, dec.vectors)
    np.testing.assert_array_equal(w2, dec.values)
    # renormalizing can move entries by one ulp
    np.testing.assert_allclose(v2, dec.vectors, rtol=0, atol=1e-15)


# -- gram_metrics --------------------------------------------------------------

def test_gram_identity():
    g = gram_metrics(np.eye(4))
    assert (g.det_gram, g.offdiag_max, g.frob_dev) == (1.0, 0.0, 0.0)
    assert g.log_neg_log_det is None


def test_gram_t1_family_matrix():
    t = -np.pi / 3
    g = gram_metrics([[1, np.cos(t)], [0, np.sin(t)]])
    assert g.det_gram == pytest.approx(0.75, abs=1e-15)
    assert g.offdiag_max == pytest.approx(0.5, abs=1e-15)


def test_gram_requires_unit_columns():
    with pytest.raises(NotNormalized):
        gram_metrics([[2.0, 0.0], [0.0, 1.0]])


def test_gram_log_neg_log_det():
    t = -np.pi / 3
    g = gram_metrics([[1, np.cos(t)], [0, np.sin(t)]])
    assert g.log_neg_log_det == pytest.approx(np.log(-np.log(0.75)), rel=1e-13)


@given(seeds, dims)
def test_gram_phase_invariance(seed, n):
    rng = np.random.default_rng(seed)
    x = normalize_columns(sample_matrix(EnsembleSpec("complex-ginibre", n, seed)))
    d = random_phases(n, rng)
    g1, g2 = gram_metrics(x), gram_metrics(x @ d)
    assert abs(g1.det_gram - g2.det_gram) <= 1e-12
    assert abs(g1.offdiag_max - g2.offdiag_max) <= 1e-12


@given(seeds, dims, st.sampled_from(["uniform01", "gaussian", "complex-ginibre"]))
def test_hadamard_bound(seed, n, kind):
    x = normalize_columns(sample_matrix(EnsembleSpec(kind, n, seed)))
    g = gram_metrics(x)
    assert 0.0 <= g.det_gram <= 1.0 + 1e-12
    assert (abs(g.det_gram - 1) <= 1e-10) == (g.frob_dev <= 1e-5)


@pytest.mark.parametrize("size,unitary", [(1e-8, True), (1e-3, False)])
def test_det_and_frob_agree_near_unitary(size, unitary):
    rng = np.random.default_rng(3)
    for seed in range(50):
        u = sample_matrix(EnsembleSpec("haar-unitary", 5, seed))
        x = normalize_columns(u + size * rng.standard_normal((5, 5)))
        g = gram_metrics(x)
        assert (abs(g.det_gram - 1) <= 1e-10) is unitary
        assert (g.frob_dev <= 1e-5) is unitary


# -- sample_matrix -------------------------------------------------------------

def test_haar_orthogonal_is_orthogonal():
    for seed in range(20):
        q = sample_matrix(EnsembleSpec("haar-orthogonal", 6, seed))
        assert np.all(q.imag == 0)
        assert np.linalg.norm(q.T @ q - np.eye(6)) < 1e-12


def test_haar_unitary_is_unitary():
    u = sample_matrix(EnsembleSpec("haar-unitary", 6, 1))
    assert np.linalg.norm(u.conj().T @ u - np.eye(6)) < 1e-12


def test_sampling_is_deterministic():
    a = sample_matrix(EnsembleSpec("gaussian", 3, 42))
    b = sample_matrix(EnsembleSpec("gaussian", 3, 42))
    assert a.tobytes() == b.tobytes()


def test_uniform_range():
    m = sample_matrix(EnsembleSpec("uniform01", 5, 1))
    assert np.all(m.imag == 0) and np.all((0 <= m.real) & (m.real < 1))


def test_ginibre_is_complex():
    m = sample_matrix(EnsembleSpec("complex-ginibre", 4, 0))
    assert np.all(m.imag != 0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_upper_triangular_constrained_family(n):
    m = sample_matrix(EnsembleSpec("upper-triangular-constrained", n, 9)).real
    np.testing.assert_array_equal(m[:, :-1], np.eye(n)[:, :-1])
    last = m[:, -1]
    assert abs(last @ last - 1) < 1e-14
    assert np.all(last[:-1] >= 0) and last[-1] < 0


def test_unsupported_dim():
    with pytest.raises(UnsupportedDim):
        sample_matrix(EnsembleSpec("gaussian", 1, 0))


def test_unknown_ensemble():
    with pytest.raises(ValueError):
        EnsembleSpec("wishart", 3, 0)


def test_haar_orthogonal_first_column_is_uniform():
    # E[q_11^2] = 1/n under Haar; a sign bug in the R-diagonal would bias q_11
    n, reps = 4, 4000
    vals = np.array([sample_matrix(EnsembleSpec("haar-orthogonal", n, s)).real[0, 0]
                     for s in range(reps)])
    assert abs(np.mean(vals ** 2) - 1 / n) < 0.02
    assert abs(np.mean(vals)) < 0.03
