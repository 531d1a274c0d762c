import numpy as np
import pytest

from volterra import hierarchy as hy, numeric, realization as rz, uspace
from volterra.errors import AntisymmetryViolation, DomainViolation
from volterra.verify import jacobi_residual, lie_bracket_fields, relative_gap

from oracles import j1_14_consistent, j1_table, pi0_m3, pi1_m5


def qp_points(n, k=20, seed=8):
    return np.random.default_rng(seed).uniform(-1, 1, size=(k, 2 * n))


def leaf_points(n, k=20, seed=9):
    return [rz.realize(x) for x in qp_points(n, k, seed)]


# -- the two operators ------------------------------------------------------

def test_r_on_j2_is_j3():
    for x in qp_points(3, 5):
        np.testing.assert_allclose(hy.recursion_apply_positive(rz.j2_matrix(3), x), rz.tensor_j3(x), atol=1e-14)


def test_n_on_j3_is_j2():
    for x in qp_points(3, 5):
        np.testing.assert_allclose(hy.recursion_apply_negative(rz.tensor_j3(x), x), rz.j2_matrix(3), atol=1e-13)


def test_r_and_n_are_inverse():
    for x in qp_points(4, 10):
        R, N = hy.recursion_operator(x), hy.negative_recursion_operator(x)
        assert np.abs(R @ N - np.eye(8)).max() <= 1e-10


@pytest.mark.parametrize("i", [-1, 0, 1, 2, 3, 4])
def test_ladder_exactness(i):
    for x in qp_points(3, 5):
        J = hy.generate_tensor(i, x)
        assert relative_gap(hy.recursion_apply_positive(J, x), hy.generate_tensor(i + 1, x)) <= 1e-10
        assert relative_gap(hy.recursion_apply_negative(J, x), hy.generate_tensor(i - 1, x)) <= 1e-10


def test_non_antisymmetric_result_is_reported():
    with pytest.raises(AntisymmetryViolation):
        hy.recursion_apply_positive(np.eye(6), np.zeros(6))


# -- generated tensors ------------------------------------------------------

def test_j1_at_origin():
    J1 = hy.generate_tensor(1, np.zeros(6))
    assert J1[0, 1] == pytest.approx(0, abs=1e-15)
    np.testing.assert_allclose(J1, j1_table(np.zeros(6)), atol=1e-14)


def test_j1_matches_table_off_the_14_entry():
    mask = np.ones((6, 6), bool)
    mask[0, 3] = mask[3, 0] = False
    for x in qp_points(3, 50):
        J1 = hy.generate_tensor(1, x)
        ref = j1_table(x)
        assert np.abs(J1 - ref)[mask].max() <= 1e-9 * np.abs(ref).max()


def test_j1_14_entry_is_fixed_by_the_u1_u2_bracket():
    for x in qp_points(3, 50):
        J1 = hy.generate_tensor(1, x)
        assert J1[0, 3] == pytest.approx(j1_14_consistent(x), rel=1e-10)
        # {u1, u2} = -e^{p1} e^{q2-q1} ({p1, q2} - {p1, q1}) = u2
        u = rz.realize(x)
        u12 = -np.exp(x[3]) * np.exp(x[1] - x[0]) * (J1[3, 1] - J1[3, 0])
        assert u12 == pytest.approx(u[1], rel=1e-10)


def test_table_14_entry_disagrees_away_from_q1_eq_q2():
    x = np.array([0.0, 0.5, 0.2, 0.1, -0.3, 0.4])
    assert abs(hy.generate_tensor(1, x)[0, 3] - j1_table(x)[0, 3]) > 1e-2


@pytest.mark.parametrize("i", [0, 1, 4, 5])
def test_generated_tensors_are_poisson(i):
    J = hy.tensor_field(i, 3)
    assert max(jacobi_residual(J, x) for x in qp_points(3, 10)) <= 1e-6


def test_generated_tensor_provenance():
    assert hy.tensor_field(4, 2).provenance == "recursion-positive"
    assert hy.tensor_field(0, 2).provenance == "recursion-negative"
    assert hy.tensor_field(3, 2).partials is not None


# -- flows and symmetries ---------------------------------------------------

def test_chi2_from_recursion_at_origin():
    x = np.zeros(6)
    chi2 = hy.recursion_apply_positive(hy.generate_flow(1, x), x)
    assert relative_gap(chi2, rz.j2_matrix(3) @ rz.grad_hamiltonian(x, 2)) <= 1e-9


@pytest.mark.parametrize("i", [1, 2, 3, 4])
def test_flows_are_hamiltonian(i):
    for x in qp_points(3, 10):
        assert relative_gap(hy.generate_flow(i, x), rz.j2_matrix(3) @ rz.grad_hamiltonian(x, i)) <= 1e-8


@pytest.mark.parametrize("i,j", [(1, 2), (1, 3), (2, 3)])
def test_flows_commute(i, j):
    for x in qp_points(2, 5):
        np.testing.assert_allclose(lie_bracket_fields(hy.flow_field(i, 2), hy.flow_field(j, 2), x), 0, atol=1e-6)


def test_chi2_pushforward_is_half_the_lenard_field():
    for u in leaf_points(3, 10):
        x = rz.preimage(u)
        push = rz.realize_jacobian(x) @ hy.generate_flow(2, x)
        target = uspace.bracket_pi(2, u) @ uspace.grad_h(u, 2)
        assert relative_gap(push, rz.HAMILTONIAN_SCALE * target) <= 1e-8
        assert relative_gap(push, target) > 1e-2


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_r_x0_differs_from_x1_by_a_hamiltonian_field(n):
    for x in qp_points(n, 10):
        rx0 = hy.generate_x(1, x)
        closed = rz.symmetry_x(1, x) - (n - 1) * hy.generate_flow(1, x)
        assert relative_gap(rx0, closed) <= 1e-10
        assert relative_gap(rx0, rz.symmetry_x(1, x)) > 1e-3


def test_generated_symmetry_brackets():
    n = 2
    X = lambda i: hy.x_generated_field(i, n)
    for x in qp_points(n, 5):
        assert relative_gap(lie_bracket_fields(X(0), X(1), x), hy.generate_x(1, x)) <= 1e-6
        assert relative_gap(lie_bracket_fields(X(-1), X(1), x), 2 * hy.generate_x(0, x)) <= 1e-6


# -- projection -------------------------------------------------------------

def test_project_j2_at_alternating_point():
    u = np.array([-1.0, 1, -1, 1, -1])
    np.testing.assert_allclose(hy.project_tensor(rz.tensor_j2(3), u), uspace.bracket_pi(2, u), atol=1e-15)


def test_project_j1_gives_closed_form_pi1():
    J1 = hy.tensor_field(1, 3)
    for u in leaf_points(3, 50):
        P = hy.project_tensor(J1, u)
        assert np.abs(P - pi1_m5(u)).max() <= 1e-9 * np.abs(pi1_m5(u)).max()


def test_project_j0_gives_closed_form_pi0():
    J0 = hy.tensor_field(0, 2)
    for u in leaf_points(2, 50):
        ref = pi0_m3(u)
        assert np.abs(hy.project_tensor(J0, u) - ref).max() <= 1e-9 * np.abs(ref).max()
        np.testing.assert_allclose(uspace.bracket_pi(0, u), ref, rtol=1e-12)


def test_projected_symmetries():
    for u in leaf_points(3, 10):
        assert relative_gap(hy.project_field(hy.x_generated_field(-1, 3), u), uspace.ym1(u)) <= 1e-10
        assert relative_gap(hy.project_field(rz.x_field(1, 3), u), uspace.y1(u)) <= 1e-10


def test_projection_off_leaf():
    with pytest.raises(DomainViolation):
        hy.project_tensor(rz.tensor_j2(3), np.ones(5))


def test_d_correspondence():
    for x in qp_points(3, 20):
        D = np.exp(x[3:].sum())
        det = np.linalg.det(uspace.lax_poly(rz.realize(x)))
        assert D**2 == pytest.approx(abs(det), rel=1e-10)


def test_projected_fields_are_lazy_views():
    P = hy.projected_tensor_field(1, 5)
    u = leaf_points(3, 1)[0]
    np.testing.assert_allclose(P(u), pi1_m5(u), rtol=1e-9, atol=1e-12)
    assert P.provenance == "pushforward"
