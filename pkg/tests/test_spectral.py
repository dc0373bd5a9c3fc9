import math

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from landmarking.exceptions import InvalidArgumentError, NotPositiveDefiniteError
from landmarking.spectral import (GershgorinState, block_l1_norms, brute_force_best_submatrix,
                                  condition_number, error_bound, gershgorin_circles, surrogate_q,
                                  surrogate_q_from_scratch, sym_matrix_log, theorem2_bound)

from conftest import PATH3, PATH_LAPLACIAN, random_spd


def test_circles_identity():
    c, r, lo, hi = gershgorin_circles(np.eye(3))
    np.testing.assert_array_equal(c, 1.0)
    np.testing.assert_array_equal(r, 0.0)
    assert lo == hi == 1.0


def test_circles_two_by_two():
    c, r, lo, hi = gershgorin_circles(np.array([[2.0, 1], [1, 2]]))
    np.testing.assert_array_equal(c, [2, 2])
    np.testing.assert_array_equal(r, [1, 1])
    assert (lo, hi) == (1.0, 3.0)


def test_circles_path_laplacian():
    _, _, lo, hi = gershgorin_circles(PATH_LAPLACIAN)
    assert (lo, hi) == (0.0, 4.0)
    w = np.linalg.eigvalsh(PATH_LAPLACIAN)
    np.testing.assert_allclose(w, [0, 1, 3], atol=1e-12)
    assert np.all((w >= lo - 1e-12) & (w <= hi + 1e-12))


def test_circles_reject_asymmetric():
    with pytest.raises(InvalidArgumentError):
        gershgorin_circles(np.array([[1.0, 2], [0, 1]]))


def test_sparse_and_dense_agree(rng):
    m = random_spd(rng, 12)
    a = gershgorin_circles(m)
    b = gershgorin_circles(sp.csr_matrix(m))
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y)


def test_condition_numbers():
    assert condition_number(np.eye(3)) == 1.0
    assert condition_number(np.diag([1.0, 10])) == pytest.approx(10)
    assert condition_number(np.array([[2.0, 1], [1, 2]])) == pytest.approx(3)
    with pytest.raises(NotPositiveDefiniteError, match="not positive definite"):
        condition_number(np.array([[1.0, 2], [2, 1]]))


def test_block_norms_examples(rng):
    assert block_l1_norms(PATH3, [0]) == (1.0, 3.0)
    assert block_l1_norms(np.eye(3), [0]) == (0.0, 1.0)
    m = random_spd(rng, 6)
    assert block_l1_norms(m, [0, 1, 2, 4, 5])[1] == pytest.approx(abs(m[3, 3]))
    for bad in ([], [0, 1, 2]):
        with pytest.raises(InvalidArgumentError):
            block_l1_norms(PATH3, bad)


def test_error_bound_examples():
    assert error_bound(PATH3, [0]) == pytest.approx(4.0)
    assert math.isinf(error_bound(np.eye(3), [0]))
    assert math.isinf(error_bound(2 * np.eye(3), [0]))
    with pytest.raises(NotPositiveDefiniteError):
        error_bound(np.array([[1.0, 0, 0], [0, 1, 2], [0, 2, 1]]), [0])


def test_surrogate_q_examples():
    state = GershgorinState(PATH3)
    state.remove(0)
    np.testing.assert_array_equal(state.residual[[1, 2]], [1, 1])
    assert surrogate_q(state) == 4.0
    assert math.isinf(surrogate_q(GershgorinState(PATH_LAPLACIAN)))
    assert math.isinf(surrogate_q(GershgorinState(np.diag([2.0, 3]))))


def test_surrogate_q_empty():
    state = GershgorinState(np.diag([1.0, 2]))
    state.remove(0)
    state.remove(1)
    with pytest.raises(InvalidArgumentError):
        surrogate_q(state)


def test_state_initial_and_double_remove():
    state = GershgorinState(PATH3)
    np.testing.assert_array_equal(state.residual, state.radii)
    state.remove(1)
    with pytest.raises(InvalidArgumentError):
        state.remove(1)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2**31), st.data())
def test_incremental_residuals_match_scratch(n, seed, data):
    rng = np.random.default_rng(seed)
    m = random_spd(rng, n)
    state = GershgorinState(sp.csr_matrix(m))
    order = data.draw(st.permutations(range(n)))
    a = np.abs(m)
    for i in order[:-1]:
        state.remove(i)
        u = state.unlabeled
        scratch = a[np.ix_(u, u)].sum(axis=1) - np.diag(a)[u]
        np.testing.assert_allclose(state.residual[u], scratch, atol=1e-9)
        assert np.all(state.residual[u] >= 0)
        assert np.all(state.residual[u] <= state.radii[u] + 1e-12)
        assert surrogate_q(state) == pytest.approx(surrogate_q_from_scratch(m, u), rel=1e-9)


def test_log_examples():
    np.testing.assert_allclose(sym_matrix_log(np.eye(3)), 0, atol=1e-14)
    np.testing.assert_allclose(sym_matrix_log(np.diag([math.e, math.e ** 2])), np.diag([1.0, 2]),
                               atol=1e-14)
    with pytest.raises(NotPositiveDefiniteError):
        sym_matrix_log(np.diag([1.0, -1.0]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31))
def test_log_round_trip(n, seed):
    m = random_spd(np.random.default_rng(seed), n)
    back = scipy.linalg.expm(sym_matrix_log(m))
    assert np.linalg.norm(back - m) <= 1e-8 * np.linalg.norm(m)


def test_brute_force_examples(rng):
    assert brute_force_best_submatrix(PATH3, 1) == ([1], 1.0)
    deleted, kappa = brute_force_best_submatrix(np.diag([1.0, 1, 9]), 1)
    assert deleted == [2] and kappa == 1.0
    m = random_spd(rng, 6)
    assert brute_force_best_submatrix(m, 5)[1] == 1.0
    with pytest.raises(InvalidArgumentError, match="greedy"):
        brute_force_best_submatrix(np.eye(21), 1)


def test_brute_force_ties_lexicographic():
    assert brute_force_best_submatrix(np.eye(4), 2)[0] == [0, 1]


def test_theorem2_bound_value():
    m = np.diag([4.0, 2.0, 1.0])
    # eigenvalues descending 4,2,1; L=1 -> (1*2+1) * 4 / 2
    assert theorem2_bound(m, 1) == pytest.approx(6.0)
