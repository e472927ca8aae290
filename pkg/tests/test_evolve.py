import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kslin.evolve import (
    Trajectory,
    eigen_solution,
    evolve_dense,
    evolve_stepped,
    extract_carleman_state,
    extract_observable,
    koopman_mode_solution,
    matrix_exponential,
)
from kslin.exceptions import DefectiveMatrixError
from kslin.grid import make_grid
from kslin.koopman import build_koopman_matrix
from kslin.models import get_model

rng = np.random.default_rng(99)
TIMES = np.linspace(0.0, 2.0, 21)


def quadratic_lift(n):
    m = get_model("quadratic")
    grid = make_grid(m.x0, m.radius, n)
    return build_koopman_matrix(m.field, grid), grid


def rel_diff(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


class TestMatrixExponential:
    def test_zero(self):
        np.testing.assert_array_equal(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(matrix_exponential(np.diag([1.0, -2.0])), np.diag([math.e, math.exp(-2)]), rtol=1e-14)

    def test_nilpotent(self):
        np.testing.assert_allclose(matrix_exponential(np.array([[0.0, 1.0], [0.0, 0.0]])), [[1, 1], [0, 1]], atol=1e-15)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            matrix_exponential(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            matrix_exponential(np.zeros((2, 3)))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_semigroup(self, seed, s, t):
        r = np.random.default_rng(seed)
        M = r.normal(size=(10, 10))
        M *= 5.0 / np.linalg.norm(M, 2)
        lhs = matrix_exponential(M * (s + t))
        rhs = matrix_exponential(M * s) @ matrix_exponential(M * t)
        assert rel_diff(rhs, lhs) <= 1e-9


class TestDense:
    def test_zero_matrix(self):
        y0 = rng.normal(size=4)
        traj = evolve_dense(np.zeros((4, 4)), y0, TIMES)
        np.testing.assert_array_equal(traj.values, np.tile(y0, (TIMES.size, 1)))
        assert not traj.diverged

    def test_scalar(self):
        traj = evolve_dense(np.array([[-0.3]]), np.array([1.0]), TIMES)
        np.testing.assert_allclose(traj.values[:, 0], np.exp(-0.3 * TIMES), rtol=1e-13)

    def test_matrix_of_initial_vectors(self):
        M = rng.normal(size=(5, 5))
        Y0 = rng.normal(size=(5, 2))
        both = evolve_dense(M, Y0, TIMES)
        for c in range(2):
            single = evolve_dense(M, Y0[:, c], TIMES)
            np.testing.assert_allclose(both.values[:, :, c], single.values, rtol=1e-13, atol=1e-13)

    def test_non_uniform_times(self):
        M = rng.normal(size=(4, 4))
        y0 = rng.normal(size=4)
        times = np.array([0.0, 0.1, 0.15, 0.9, 2.0])
        traj = evolve_dense(M, y0, times)
        for k, t in enumerate(times):
            np.testing.assert_allclose(traj.values[k], matrix_exponential(M * t) @ y0, rtol=1e-11)

    def test_quadratic_model_middle_entry_at_final_time(self):
        op, grid = quadratic_lift(11)
        times = np.linspace(0, 10, 201)
        traj = evolve_dense(op.matrix, grid.points[:, 0], times)
        got = traj.values[-1, op.middle_index]
        assert abs(got - 1.0 / (1.0 / 0.08 - 10.0)) < 1e-3

    def test_divergence_flag(self):
        traj = evolve_dense(np.array([[800.0]]), np.array([1.0]), np.linspace(0, 1, 11))
        assert traj.diverged
        k = traj.diverged_from
        assert np.all(np.isfinite(traj.values[:k]))
        assert np.all(np.isnan(traj.values[k:]))
        assert not traj.valid[k:].any() and traj.valid[:k].all()

    def test_times_validated(self):
        with pytest.raises(ValueError):
            evolve_dense(np.eye(2), np.ones(2), [0.0, 1.0, 0.5])
        with pytest.raises(ValueError):
            evolve_dense(np.eye(2), np.ones(2), [-1.0, 0.0])


class TestStepped:
    def test_zero_matrix(self):
        y0 = rng.normal(size=3)
        traj = evolve_stepped(np.zeros((3, 3)), y0, TIMES, 4)
        np.testing.assert_array_equal(traj.values[-1], y0)

    def test_scalar_decay(self):
        traj = evolve_stepped(np.array([[-1.0]]), np.array([1.0]), [0.0, 1.0], 1000)
        assert abs(traj.values[-1, 0] - math.exp(-1)) <= 1e-10

    def test_random_small_matches_dense(self):
        M = rng.normal(size=(5, 5))
        y0 = rng.normal(size=5)
        a = evolve_stepped(M, y0, TIMES, 200)
        b = evolve_dense(M, y0, TIMES)
        assert rel_diff(a.values, b.values) <= 1e-8

    def test_sparse_input(self):
        import scipy.sparse as sp

        M = rng.normal(size=(6, 6))
        y0 = rng.normal(size=6)
        a = evolve_stepped(sp.csr_matrix(M), y0, TIMES, 50)
        b = evolve_stepped(M, y0, TIMES, 50)
        np.testing.assert_allclose(a.values, b.values, rtol=1e-13)

    def test_bad_substeps(self):
        with pytest.raises(ValueError):
            evolve_stepped(np.eye(2), np.ones(2), TIMES, 0)

    def test_divergence(self):
        traj = evolve_stepped(np.array([[900.0]]), np.array([1.0]), np.linspace(0, 1, 11), 200)
        assert traj.diverged and np.isnan(traj.values[-1, 0])


class TestModes:
    def test_diagonal_matrix(self):
        lam = np.array([-1.0, 0.5, 0.2])
        y0 = np.array([2.0, -1.0, 3.0])
        traj, eig = koopman_mode_solution(np.diag(lam), y0, TIMES)
        np.testing.assert_allclose(np.sort(eig.modes.real), np.sort(y0))
        np.testing.assert_allclose(traj.values, y0 * np.exp(np.outer(TIMES, lam)), rtol=1e-13)
        assert eig.condition == pytest.approx(1.0)

    def test_reconstruction_at_zero(self):
        op, grid = quadratic_lift(7)
        y0 = grid.points[:, 0]
        traj, eig = koopman_mode_solution(op, y0, TIMES)
        np.testing.assert_allclose(eig.reconstruct(0.0).real, y0, atol=1e-8 * np.abs(y0).max())
        np.testing.assert_allclose(traj.values[0], y0, atol=1e-8 * np.abs(y0).max())

    def test_residual_and_modes(self):
        op, grid = quadratic_lift(7)
        eig = eigen_solution(op.matrix, grid.points[:, 0])
        M = op.matrix
        resid = M @ eig.eigenvectors - eig.eigenvectors * eig.eigenvalues
        assert np.abs(resid).max(axis=0).max() <= 1e-8 * np.linalg.norm(M, 2)
        # sum_j c_j (v_j)_i = y0_i
        np.testing.assert_allclose((eig.eigenvectors @ eig.modes).real, grid.points[:, 0], atol=1e-8)

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_quadratic_lift_matches_dense(self, n):
        op, grid = quadratic_lift(n)
        times = np.linspace(0, 10, 201)
        modal, _ = koopman_mode_solution(op, grid.points[:, 0], times)
        dense = evolve_dense(op.matrix, grid.points[:, 0], times)
        assert rel_diff(modal.values, dense.values) <= 1e-8

    @pytest.mark.xfail(
        strict=True,
        reason="N=11 lift amplifies rounding by ~e^26 over [0, 10]; both double-precision routes "
        "sit ~1e-3 relative from a 60-digit reference, so they cannot agree to 1e-8",
    )
    def test_quadratic_lift_n11_matches_dense(self):
        op, grid = quadratic_lift(11)
        times = np.linspace(0, 10, 201)
        modal, _ = koopman_mode_solution(op, grid.points[:, 0], times)
        dense = evolve_dense(op.matrix, grid.points[:, 0], times)
        assert rel_diff(modal.values, dense.values) <= 1e-8

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_random_agreement_when_well_conditioned(self, seed):
        r = np.random.default_rng(seed)
        M = r.normal(size=(10, 10))
        M *= 5.0 / np.linalg.norm(M, 2)
        y0 = r.normal(size=10)
        times = np.linspace(0, 1, 11)
        try:
            modal, eig = koopman_mode_solution(M, y0, times, max_condition=1e8)
        except DefectiveMatrixError:
            return
        dense = evolve_dense(M, y0, times)
        assert rel_diff(modal.values, dense.values) <= 1e-7

    def test_defective_matrix_rejected(self):
        with pytest.raises(DefectiveMatrixError, match="evolve_dense"):
            koopman_mode_solution(np.array([[0.0, 1.0], [0.0, 0.0]]), np.ones(2), TIMES)


class TestExtraction:
    def test_identity_slice(self):
        vals = np.arange(12.0).reshape(4, 3)
        traj = Trajectory(np.arange(4.0), vals)
        np.testing.assert_array_equal(extract_observable(traj, 1).values, vals[:, 1])

    def test_middle_of_three(self):
        traj = Trajectory(np.zeros(1), np.array([[0.05, 0.08, 0.11]]))
        assert extract_observable(traj, 1).values[0] == 0.08

    def test_divergence_propagates(self):
        traj = Trajectory(np.arange(3.0), np.array([[1.0, 2.0], [3.0, 4.0], [np.nan, np.nan]]), 2)
        assert extract_observable(traj, 0).diverged_from == 2
        assert extract_carleman_state(traj, 1).diverged_from == 2

    def test_out_of_range(self):
        traj = Trajectory(np.zeros(1), np.zeros((1, 3)))
        with pytest.raises(IndexError):
            extract_observable(traj, 3)
        with pytest.raises(IndexError):
            extract_carleman_state(traj, 4)

    def test_carleman_state_slice(self):
        traj = Trajectory(np.zeros(1), np.array([[1.0, 0.1, 0.2, 0.01, 0.02]]))
        np.testing.assert_array_equal(extract_carleman_state(traj, 2, offset=1).values, [[0.1, 0.2]])
