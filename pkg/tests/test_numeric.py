import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volterra import numeric, realization
from volterra.errors import EvaluationDomain, NotSymmetric, SingularMatrix
from volterra.numeric import DiffConfig
from volterra.uspace import lax_pair


def inf_norm(A):
    return np.abs(A).sum(axis=1).max()


def test_solve_identity():
    B = np.arange(12.0).reshape(4, 3)
    np.testing.assert_array_equal(numeric.solve_linear(np.eye(4), B), B)


def test_solve_symplectic_form_inverse():
    J2 = realization.j2_matrix(3)
    X = numeric.solve_linear(J2, np.eye(6))
    np.testing.assert_allclose(X, -J2, atol=1e-15)


def test_solve_j3_origin_against_j1_table():
    # J1 = J2 J3^{-1} J2; at the origin D = 1 and the table entries reduce to small integers
    X = numeric.solve_linear(realization.tensor_j3(np.zeros(6)), np.eye(6))
    J2 = realization.j2_matrix(3)
    upper = {(1, 2): 0, (1, 3): 0, (1, 4): -1, (1, 5): 1, (1, 6): -1, (2, 3): 1, (2, 4): 0,
             (2, 5): 0, (3, 4): -1, (3, 5): 1, (3, 6): -1, (4, 5): -1, (4, 6): 1, (5, 6): -1}
    expected = np.zeros((6, 6))
    for (a, b), v in upper.items():
        expected[a - 1, b - 1] = v
        expected[b - 1, a - 1] = -v
    np.testing.assert_allclose(J2 @ X @ J2, expected, atol=1e-14)


def test_solve_residual_bound():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(8, 8))
    B = rng.normal(size=(8, 3))
    X = numeric.solve_linear(A, B)
    assert np.abs(A @ X - B).max() <= 1e-12 * max(1.0, inf_norm(A) * inf_norm(X))


def test_solve_singular_reports_determinant():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrix) as info:
        numeric.solve_linear(A, np.eye(2))
    assert abs(info.value.determinant) < 1e-12


def test_solve_shape_errors():
    with pytest.raises(ValueError):
        numeric.solve_linear(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        numeric.solve_linear(np.eye(3), np.ones(2))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_solve_round_trip(seed, size):
    rng = np.random.default_rng(seed)
    # well conditioned: orthogonal factors around singular values in [1e-3, 1e3]
    U, _ = np.linalg.qr(rng.normal(size=(size, size)))
    V, _ = np.linalg.qr(rng.normal(size=(size, size)))
    A = U @ np.diag(np.logspace(-3, 3, size)) @ V
    B = rng.normal(size=(size, 2))
    X = numeric.solve_linear(A, B)
    assert np.abs(A @ X - B).max() / np.abs(B).max() <= 1e-9


def test_eigenvalues_trivial():
    np.testing.assert_allclose(numeric.eigenvalues_symmetric(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    np.testing.assert_array_equal(numeric.eigenvalues_symmetric(np.zeros((4, 4))), np.zeros(4))


def test_eigenvalues_not_symmetric():
    with pytest.raises(NotSymmetric):
        numeric.eigenvalues_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigenvalues_power_sums_of_lax_matrix():
    L = lax_pair(np.ones(5)).L
    ev = numeric.eigenvalues_symmetric(L)
    for k in range(1, 7):
        direct = np.trace(np.linalg.matrix_power(L, k))
        assert np.sum(ev**k) == pytest.approx(direct, rel=1e-12)
    w, V = np.linalg.eigh(L)
    for lam, v in zip(ev, V.T):
        assert np.linalg.norm(L @ v - lam * v) <= 1e-9 * np.linalg.norm(L)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_eigenvalues_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(6, 6))
    A = A + A.T
    P = np.eye(6)[rng.permutation(6)]
    np.testing.assert_allclose(
        numeric.eigenvalues_symmetric(P @ A @ P.T), numeric.eigenvalues_symmetric(A), atol=1e-12
    )


def test_diffconfig_validation():
    with pytest.raises(ValueError):
        DiffConfig(fd_step_scale=0)
    with pytest.raises(ValueError):
        DiffConfig(singular_threshold=-1)


def test_jacobian_identity_map():
    x = np.array([0.3, -2.0, 5.0])
    np.testing.assert_allclose(numeric.jacobian(lambda v: v, x), np.eye(3), atol=1e-9)


def test_jacobian_of_realization_at_origin():
    # u1 = -e^{p1}, u2 = e^{q2-q1}, u3 = -e^{p2}, u4 = e^{q3-q2}, u5 = -e^{p3}
    expected = np.zeros((5, 6))
    expected[0, 3] = -1
    expected[1, 0], expected[1, 1] = -1, 1
    expected[2, 4] = -1
    expected[3, 1], expected[3, 2] = -1, 1
    expected[4, 5] = -1
    np.testing.assert_allclose(numeric.jacobian(realization.realize, np.zeros(6)), expected, atol=1e-9)
    np.testing.assert_array_equal(realization.realize_jacobian(np.zeros(6)), expected)


def test_jacobian_prefers_analytic():
    field = realization.x_field(1, 3)
    x = np.random.default_rng(0).uniform(-1, 1, 6)
    np.testing.assert_array_equal(numeric.jacobian(field, x), field.jacobian(x))


@pytest.mark.parametrize("cfg", [numeric.DEFAULT, numeric.VERIFY])
def test_fd_jacobian_of_x1_matches_analytic(cfg):
    field = realization.x_field(1, 3)
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.uniform(-1, 1, 6)
        exact = field.jacobian(x)
        fd = numeric.derivative(field.eval, x, cfg)
        assert np.abs(fd - exact).max() <= 1e-6 * max(1.0, np.abs(exact).max())


@pytest.mark.parametrize("richardson,low,high", [(False, 3.5, 4.5), (True, 12.0, 20.0)])
def test_fd_convergence_order(richardson, low, high):
    x = np.array([0.2, -0.4, 0.7, 0.1, -0.3, 0.5])
    exact = realization.realize_jacobian(x)
    errs = []
    for h in (4e-2, 2e-2):
        cfg = DiffConfig(fd_step_scale=h, richardson=richardson)
        errs.append(np.abs(numeric.jacobian(realization.realize, x, cfg) - exact).max())
    assert low <= errs[0] / errs[1] <= high


def test_fd_reports_evaluation_domain():
    with pytest.raises(EvaluationDomain):
        numeric.jacobian(lambda v: 1.0 / v, np.array([0.0, 1.0]))
