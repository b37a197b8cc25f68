import numpy as np
import pytest
from hypothesis import given, strategies as st

from eigenflow import dynamics
from eigenflow.dynamics import (
    Status, TrajectoryConfig, Variant, canonical_form, q_stream, run_trajectory, step,
)
from eigenflow.errors import NumericalFailure, UnsupportedDim
from eigenflow.linalg import EnsembleSpec, gram_metrics, normalize_columns, sample_matrix
from eigenflow.oracles import loop_pair

seeds = st.integers(min_value=0, max_value=2**63)
H = np.sqrt(3) / 2


# -- step ----------------------------------------------------------------------

def test_step_diagonal_gives_permutation():
    z = step(np.diag([5.0, 1.0]))
    np.testing.assert_array_equal(z, np.eye(2))


def test_step_loop_matrix_canonical_sign():
    a, b = loop_pair()
    z = step(a)
    # the canonical phase flips the second column relative to the partner
    np.testing.assert_allclose(z, b @ np.diag([1, -1]), atol=1e-15)


def test_step_loop_matrix_last_pivot():
    a, b = loop_pair()
    np.testing.assert_allclose(step(a, pivot="last"), b, atol=1e-15)
    np.testing.assert_allclose(step(b, pivot="last"), a, atol=1e-15)


def test_step_output_has_unit_columns():
    z = step(sample_matrix(EnsembleSpec("gaussian", 4, 3)))
    np.testing.assert_allclose(np.linalg.norm(z, axis=0), 1.0, atol=1e-14)


def test_randomized_variants_need_a_stream():
    with pytest.raises(ValueError):
        step(np.diag([2.0, 1.0]), Variant.PRODUCT)


def test_similarity_preserves_gram_of_eigenbasis():
    a = sample_matrix(EnsembleSpec("gaussian", 4, 11))
    z = step(a)
    w = step(a, Variant.SIMILARITY, q_stream(5))
    # Q Z Q^T is a similarity by an orthogonal Q; its Gram matrix is Q G Q^T
    assert np.linalg.svd(w, compute_uv=False) == pytest.approx(
        np.linalg.svd(z, compute_uv=False), abs=1e-12)


def test_product_keeps_columns_unit():
    a = sample_matrix(EnsembleSpec("gaussian", 5, 2))
    y = step(a, Variant.PRODUCT, q_stream(1))
    np.testing.assert_allclose(np.linalg.norm(y, axis=0), 1.0, atol=1e-13)


def test_product_with_unitary_q():
    a = sample_matrix(EnsembleSpec("gaussian", 3, 2))
    y = step(a, Variant.PRODUCT, q_stream(1), ortho_kind="complex-unitary")
    assert np.any(np.abs(y.imag) > 1e-3)


@given(seeds, st.integers(min_value=2, max_value=7))
def test_unitary_maps_to_unitary(seed, n):
    u = sample_matrix(EnsembleSpec("haar-unitary", n, seed))
    z = step(u)
    assert gram_metrics(z).frob_dev < 1e-8


# -- canonical_form ------------------------------------------------------------

def test_canonical_form_column_swap():
    p = np.array([[0, 1], [1, 0]], dtype=complex)
    np.testing.assert_array_equal(canonical_form(p), canonical_form(np.eye(2)))
    np.testing.assert_array_equal(canonical_form(p), p)


@given(seeds)
def test_canonical_form_gauge_invariance(seed):
    rng = np.random.default_rng(seed)
    x = normalize_columns(sample_matrix(EnsembleSpec("complex-ginibre", 4, seed)))
    d = np.exp(1j * rng.uniform(-np.pi, np.pi, 4))
    perm = rng.permutation(4)
    np.testing.assert_allclose(canonical_form((x * d)[:, perm]), canonical_form(x), atol=1e-14)


def test_canonical_form_separates_distinct_matrices():
    x = normalize_columns(sample_matrix(EnsembleSpec("gaussian", 3, 1)))
    y = normalize_columns(sample_matrix(EnsembleSpec("gaussian", 3, 2)))
    assert np.linalg.norm(canonical_form(x) - canonical_form(y)) > 1e-3


# -- run_trajectory ------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        TrajectoryConfig(max_iters=0)
    with pytest.raises(ValueError):
        TrajectoryConfig(ortho_kind="symplectic")
    with pytest.raises(ValueError):
        TrajectoryConfig(pivot="first")


def test_dim_one_rejected():
    with pytest.raises(UnsupportedDim):
        run_trajectory(np.ones((1, 1)))


def test_orthogonal_start_converges_immediately():
    q = sample_matrix(EnsembleSpec("haar-orthogonal", 4, 0))
    traj = run_trajectory(q)
    assert traj.final_status is Status.CONVERGED
    assert traj.iterations <= 1


def test_unnormalized_start_is_flagged():
    traj = run_trajectory(np.diag([3.0, 2.0]))
    assert traj.pre_normalized
    assert traj.final_status is Status.CONVERGED and traj.iterations == 0


def test_rank_deficient_start_is_defective():
    traj = run_trajectory(np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert traj.final_status is Status.DEFECTIVE
    assert traj.iterations == 0


def test_step_failure_marks_defective(monkeypatch):
    def broken(*args, **kwargs):
        raise NumericalFailure("boom")
    monkeypatch.setattr(dynamics, "eigendecompose", broken)
    traj = run_trajectory(sample_matrix(EnsembleSpec("gaussian", 3, 0)))
    assert traj.final_status is Status.DEFECTIVE
    assert "NumericalFailure" in traj.diagnostic
    assert len(traj.records) == 1


def test_loop_start_canonical_convention():
    a, _ = loop_pair()
    traj = run_trajectory(a)
    assert traj.final_status in (Status.CYCLING, Status.CONVERGED)


def test_loop_start_last_pivot_cycles_quickly():
    a, _ = loop_pair()
    cfg = TrajectoryConfig(pivot="last")
    traj = run_trajectory(a, config=cfg)
    assert traj.final_status is Status.CYCLING
    assert traj.iterations <= 2 * cfg.cycle_window
    assert traj.cycle.iter - traj.cycle.matched_iter == 2


def test_canonical_signs_leave_the_t1_family():
    # max-entry phases flip the second column out of the fourth quadrant, and the
    # orbit settles on a genuine 3-cycle well away from any unitary matrix
    t = -np.pi / 8
    traj = run_trajectory([[1, np.cos(t)], [0, np.sin(t)]])
    assert traj.final_status is Status.CYCLING
    assert traj.cycle.iter - traj.cycle.matched_iter == 3
    assert traj.last.metrics.frob_dev > 0.1


def test_dim_eight_exhausts():
    cfg = TrajectoryConfig(max_iters=300)
    dets = []
    for seed in range(5):
        traj = run_trajectory(sample_matrix(EnsembleSpec("gaussian", 8, seed)), config=cfg)
        assert traj.final_status in (Status.EXHAUSTED, Status.CYCLING)
        dets.append(traj.last.metrics.det_gram)
    assert np.median(dets) < 0.99


@pytest.mark.parametrize("variant", list(Variant))
def test_trajectories_are_deterministic(variant):
    a = sample_matrix(EnsembleSpec("gaussian", 4, 21))
    cfg = TrajectoryConfig(max_iters=60)
    t1 = run_trajectory(a, variant, cfg, seed=99)
    t2 = run_trajectory(a, variant, cfg, seed=99)
    assert t1.final_matrix.tobytes() == t2.final_matrix.tobytes()
    assert [r.metrics for r in t1.records] == [r.metrics for r in t2.records]


@given(seeds, st.integers(min_value=2, max_value=5), st.sampled_from(list(Variant)))
def test_status_soundness(seed, n, variant):
    cfg = TrajectoryConfig(max_iters=40)
    traj = run_trajectory(sample_matrix(EnsembleSpec("gaussian", n, seed)), variant, cfg, seed)
    assert [r.iter for r in traj.records] == list(range(len(traj.records)))
    assert all(r.status is Status.RUNNING for r in traj.records[:-1])
    last = traj.last
    if traj.final_status is Status.CONVERGED:
        assert last.metrics.frob_dev < cfg.converge_tol
    if traj.final_status is Status.EXHAUSTED:
        assert last.iter == cfg.max_iters
    if traj.final_status is Status.DEFECTIVE and not traj.diagnostic:
        assert last.metrics.min_singular < cfg.defect_tol
    if traj.final_status is Status.CYCLING:
        assert traj.cycle is not None and traj.cycle.distance < cfg.cycle_tol
    for r in traj.records:
        lnld = r.log_neg_log_det
        assert (lnld is None) == (not 0 < r.metrics.det_gram < 1)
