"""Recursion operators on the symplectic side and projection to u-space.

``R = J3 J2^{-1}`` raises the hierarchy and ``N = J2 J3^{-1}`` lowers it:
``J_{i+1} = R J_i``, ``chi_{i+1} = R chi_i``, ``X_{i+1} = R X_i``. Generated
objects carry no analytic derivatives; Lie derivatives of them go through the
finite-difference engine.
"""
import numpy as np

from . import numeric, realization, uspace
from .errors import AntisymmetryViolation
from .fields import PoissonTensorField, VectorField

ANTISYMMETRY_RTOL = 1e-10
GAUGE_RTOL = 1e-10
GAUGE_SHIFT = 0.731


def _n_of(x):
    q, _ = realization.split(x)
    return q.size


def _value(T, x):
    if callable(T):
        return np.asarray(T(x), dtype=float)
    return np.asarray(T, dtype=float)


def _check_antisymmetric(J, what):
    scale = max(1.0, np.abs(J).max(initial=0.0))
    err = np.abs(J + J.T).max(initial=0.0)
    if err > ANTISYMMETRY_RTOL * scale:
        raise AntisymmetryViolation(f"{what} is not antisymmetric (|J + J^T| = {err:.3e})")
    return J


def recursion_operator(x, cfg=numeric.DEFAULT):
    """Matrix of R = J3 J2^{-1} at x."""
    n = _n_of(x)
    J2 = realization.j2_matrix(n)
    # R = J3 J2^{-1}  <=>  J2^T R^T = J3^T
    return numeric.solve_linear(J2.T, realization.tensor_j3(x).T, cfg).T


def negative_recursion_operator(x, cfg=numeric.DEFAULT):
    """Matrix of N = J2 J3^{-1} at x."""
    n = _n_of(x)
    J3 = realization.tensor_j3(x)
    return numeric.solve_linear(J3.T, realization.j2_matrix(n).T, cfg).T


def recursion_apply_positive(T, x, cfg=numeric.DEFAULT):
    """R applied to a vector (field) or bivector (field) at x."""
    x = np.asarray(x, dtype=float)
    v = _value(T, x)
    n = _n_of(x)
    out = realization.tensor_j3(x) @ numeric.solve_linear(realization.j2_matrix(n), v, cfg)
    if v.ndim == 2:
        _check_antisymmetric(out, "R J")
    return out


def recursion_apply_negative(T, x, cfg=numeric.DEFAULT):
    """N applied to a vector (field) or bivector (field) at x."""
    x = np.asarray(x, dtype=float)
    v = _value(T, x)
    n = _n_of(x)
    out = realization.j2_matrix(n) @ numeric.solve_linear(realization.tensor_j3(x), v, cfg)
    if v.ndim == 2:
        _check_antisymmetric(out, "N J")
    return out


def generate_tensor(i, x, cfg=numeric.DEFAULT):
    """``J_i``: closed forms for i = 2, 3; ``R^{i-3} J3`` above; ``N^{2-i} J2`` below."""
    x = np.asarray(x, dtype=float)
    n = _n_of(x)
    if i == 2:
        return realization.j2_matrix(n)
    if i == 3:
        return realization.tensor_j3(x)
    if i > 3:
        J = realization.tensor_j3(x)
        for _ in range(i - 3):
            J = recursion_apply_positive(J, x, cfg)
        return J
    J = realization.j2_matrix(n)
    for _ in range(2 - i):
        J = recursion_apply_negative(J, x, cfg)
    return J


def tensor_field(i, n):
    if i == 2:
        return realization.tensor_j2(n)
    if i == 3:
        return realization.j3_field(n)
    provenance = "recursion-positive" if i > 3 else "recursion-negative"
    return PoissonTensorField(
        2 * n, lambda x: generate_tensor(i, x), None, degree=i, provenance=provenance, name=f"J{i}"
    )


def _iterate(v, x, k, cfg):
    for _ in range(abs(k)):
        v = (recursion_apply_positive if k > 0 else recursion_apply_negative)(v, x, cfg)
    return v


def generate_x(i, x, cfg=numeric.DEFAULT):
    """Oevel master symmetry ``X_i = R^i X0`` (``N^{-i} X0`` for negative i)."""
    x = np.asarray(x, dtype=float)
    return _iterate(realization.symmetry_x(0, x), x, i, cfg)


def x_generated_field(i, n):
    if i == 0:
        return realization.x_field(0, n)
    return VectorField(2 * n, lambda x: generate_x(i, x), None, index=i, kind="master X", name=f"X{i}")


def generate_flow(i, x, cfg=numeric.DEFAULT):
    """``chi_i = R^{i-1} chi_1`` with ``chi_1 = J2 grad h1``."""
    if i < 1:
        raise ValueError("flow index must be >= 1")
    x = np.asarray(x, dtype=float)
    chi1 = realization.j2_matrix(_n_of(x)) @ realization.grad_hamiltonian(x, 1)
    return _iterate(chi1, x, i - 1, cfg)


def flow_field(i, n):
    if i == 1:
        return realization.hamiltonian_field(n)
    return VectorField(2 * n, lambda x: generate_flow(i, x), None, index=i, kind="flow", name=f"chi{i}")


def generate_h(i, x):
    """``h_i``; closed forms for i = 1, 2, pullback ``H_i / 2`` beyond."""
    return realization.hamiltonian_h(x, i)


# -- projection to u-space --------------------------------------------------

def _project_once(T, x, kind):
    Du = realization.realize_jacobian(x)
    v = _value(T, x)
    return Du @ v @ Du.T if kind == "tensor" else Du @ v


def _project(T, u, kind, check_gauge):
    x = realization.preimage(u)
    out = _project_once(T, x, kind)
    if check_gauge:
        shifted = _project_once(T, realization.preimage(u, q1=GAUGE_SHIFT), kind)
        scale = max(1.0, np.abs(out).max(initial=0.0))
        gap = np.abs(out - shifted).max(initial=0.0)
        if gap > GAUGE_RTOL * scale:
            raise AntisymmetryViolation(
                f"projection depends on the q-translation gauge (gap {gap:.3e})"
            )
    return out


def project_tensor(J, u, check_gauge=True):
    """``pi(u) = Du J Du^T`` evaluated at ``preimage(u)``."""
    return _project(J, u, "tensor", check_gauge)


def project_field(X, u, check_gauge=True):
    """``Y(u) = Du X`` evaluated at ``preimage(u)``."""
    return _project(X, u, "field", check_gauge)


def projected_tensor_field(i, m):
    """u-space bracket pi_i obtained by projecting J_i; defined on the leaf only."""
    n = (m + 1) // 2
    J = tensor_field(i, n)
    return PoissonTensorField(
        m, lambda u: project_tensor(J, u, check_gauge=False), None, degree=i, provenance="pushforward", name=f"pi{i}"
    )


def projected_y_field(i, m):
    n = (m + 1) // 2
    X = x_generated_field(i, n)
    return VectorField(m, lambda u: project_field(X, u, check_gauge=False), None, index=i, kind="master Y", name=f"Y{i}")
