"""The Volterra (Kac-van Moerbeke) lattice in u-coordinates.

Points are 1-d arrays; ``u[i - 1]`` holds the lattice variable ``u_i``. Any
term that refers to ``u_0``, ``u_{m+1}`` or another out-of-range index is
dropped.
"""
from dataclasses import dataclass

import numpy as np

from . import numeric
from .errors import EvaluationDomain, NegativeProduct, Unsupported
from .fields import PoissonTensorField, VectorField, lie_derivative_matrix


def _as_u(u):
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 2:
        raise ValueError(f"expected a vector of at least 2 components, got shape {u.shape}")
    return u


def _padded(u):
    """(0, u_1, ..., u_m, 0) so that ``up[i]`` is ``u_i`` with boundary zeros."""
    return np.concatenate(([0.0], u, [0.0]))


# -- flow -------------------------------------------------------------------

def volterra_rhs(u):
    """``du_i/dt = u_i (u_{i+1} - u_{i-1})``."""
    u = _as_u(u)
    up = _padded(u)
    return u * (up[2:] - up[:-2])


def volterra_jacobian(u):
    u = _as_u(u)
    up = _padded(u)
    m = u.size
    jac = np.diag(up[2:] - up[:-2])
    idx = np.arange(m - 1)
    jac[idx, idx + 1] = u[:-1]
    jac[idx + 1, idx] = -u[1:]
    return jac


def volterra_field(m):
    return VectorField(m, volterra_rhs, volterra_jacobian, index=1, kind="flow", name="volterra")


# -- Lax pair and invariants --------------------------------------------------

@dataclass(frozen=True)
class LaxPair:
    L: np.ndarray
    B: np.ndarray
    L_poly: np.ndarray


def lax_poly(u):
    """Polynomial Lax matrix, similar to the symmetric one on the positive orthant.

    Same diagonal as L; entry (i, i+2) is ``u_i u_{i+1}`` and (i+2, i) is 1.
    Defined for every sign pattern.
    """
    u = _as_u(u)
    up = _padded(u)
    m = u.size
    L = np.diag(up[:-1] + up[1:])
    idx = np.arange(m - 1)
    L[idx, idx + 2] = u[:-1] * u[1:]
    L[idx + 2, idx] = 1.0
    return L


def lax_pair(u):
    """Symmetric Lax pair (L, B) with ``dL/dt = [B, L]``, plus ``L_poly``."""
    u = _as_u(u)
    prod = u[:-1] * u[1:]
    if np.any(prod < 0):
        i = int(np.argmax(prod < 0)) + 1
        raise NegativeProduct(f"u_{i} u_{i + 1} < 0: symmetric Lax form needs real square roots")
    up = _padded(u)
    m = u.size
    root = np.sqrt(prod)
    idx = np.arange(m - 1)
    L = np.diag(up[:-1] + up[1:])
    L[idx, idx + 2] = root
    L[idx + 2, idx] = root
    B = np.zeros_like(L)
    B[idx, idx + 2] = 0.5 * root
    B[idx + 2, idx] = -0.5 * root
    return LaxPair(L, B, lax_poly(u))


def invariant_h(u, i):
    """``H_i = Tr(L^i) / i`` computed from the polynomial Lax matrix."""
    if i < 1:
        raise ValueError("invariant index must be >= 1")
    L = lax_poly(u)
    return float(np.trace(np.linalg.matrix_power(L, i))) / i


def trace_power(u, k):
    """``Tr(L^k)`` for ``k >= 0``; ``k H_k`` for positive k and ``m + 1`` for k = 0."""
    return float(np.trace(np.linalg.matrix_power(lax_poly(u), k)))


def grad_h(u, i):
    """Analytic gradient of ``H_i``: ``dH_i/du_k = Tr(L^{i-1} dL/du_k)``."""
    u = _as_u(u)
    m = u.size
    P = np.linalg.matrix_power(lax_poly(u), i - 1)
    g = np.empty(m)
    for k in range(m):  # k is the 0-based slot of u_{k+1}
        s = P[k, k] + P[k + 1, k + 1]
        if k + 1 < m:
            s += P[k + 2, k] * u[k + 1]
        if k >= 1:
            s += P[k + 1, k - 1] * u[k - 1]
        g[k] = s
    return g


# -- Poisson tensors --------------------------------------------------------

def _pi2(u):
    m = u.size
    P = np.zeros((m, m))
    idx = np.arange(m - 1)
    P[idx, idx + 1] = u[:-1] * u[1:]
    return P - P.T


def _pi2_partials(u):
    m = u.size
    D = np.zeros((m, m, m))
    for i in range(m - 1):
        D[i, i + 1, i] = u[i + 1]
        D[i, i + 1, i + 1] = u[i]
    return D - D.transpose(1, 0, 2)


def _pi3(u):
    m = u.size
    P = np.zeros((m, m))
    idx = np.arange(m - 1)
    P[idx, idx + 1] = u[:-1] * u[1:] * (u[:-1] + u[1:])
    idx = np.arange(m - 2)
    P[idx, idx + 2] = u[:-2] * u[1:-1] * u[2:]
    return P - P.T


def _pi3_partials(u):
    m = u.size
    D = np.zeros((m, m, m))
    for i in range(m - 1):
        a, b = u[i], u[i + 1]
        D[i, i + 1, i] = 2 * a * b + b * b
        D[i, i + 1, i + 1] = a * a + 2 * a * b
    for i in range(m - 2):
        a, b, c = u[i], u[i + 1], u[i + 2]
        D[i, i + 2, i] = b * c
        D[i, i + 2, i + 1] = a * c
        D[i, i + 2, i + 2] = a * b
    return D - D.transpose(1, 0, 2)


def _require_nonzero(u, slots):
    for k in slots:
        if u[k] == 0.0:
            raise EvaluationDomain(f"division by zero component u{k + 1}")


def _pi1(u):
    m = u.size
    if m % 2 == 0:
        raise Unsupported("the linear bracket pi_1 is defined for odd m only")
    y = ym1(u)
    dy = ym1_jacobian(u)
    dP = _pi2_partials(u)
    P = _pi2(u)
    return lie_derivative_matrix(y, dy, P, dP)


def _pi0(u):
    if u.size != 3:
        raise Unsupported(
            "closed-form pi_0 is available for m = 3 only; use hierarchy.project_tensor for other m"
        )
    _require_nonzero(u, (0, 2))
    u1, u2, u3 = u
    den = u1 * u3
    P = np.zeros((3, 3))
    P[0, 1] = u2 * (u2 + u3) / den
    P[0, 2] = -u2 * (u1 + u2 + u3) / den
    P[1, 2] = u2 * (u2 + u1) / den
    return P - P.T


def bracket_pi(k, u):
    """Poisson matrix ``{u_i, u_j}`` of the bracket of degree ``k`` in {0, 1, 2, 3}."""
    u = _as_u(u)
    if k == 2:
        return _pi2(u)
    if k == 3:
        return _pi3(u)
    if k == 1:
        return _pi1(u)
    if k == 0:
        return _pi0(u)
    raise Unsupported(f"no closed form for pi_{k}; use the recursion hierarchy")


def pi_field(k, m):
    partials = {2: _pi2_partials, 3: _pi3_partials}.get(k)
    return PoissonTensorField(
        m,
        lambda u: bracket_pi(k, u),
        partials,
        degree=k,
        provenance="closed-form",
        name=f"pi{k}",
    )


# -- master symmetries ------------------------------------------------------

def ym1(u):
    """The degree -1 master symmetry.

    Components obey ``f_1 = 1``, ``f_{2i} = -(u_{2i}/u_{2i-1}) f_{2i-1}``,
    ``f_{2i+1} = 1 - f_{2i}``; this is the u-space image of ``N X_0``.
    """
    u = _as_u(u)
    m = u.size
    _require_nonzero(u, range(0, m - 1, 2))
    f = np.empty(m)
    f[0] = 1.0
    for k in range(1, m):
        if k % 2:  # u_{k+1} has even index
            f[k] = -(u[k] / u[k - 1]) * f[k - 1]
        else:
            f[k] = 1.0 - f[k - 1]
    return f


def ym1_jacobian(u):
    u = _as_u(u)
    m = u.size
    f = ym1(u)
    df = np.zeros((m, m))
    for k in range(1, m):
        if k % 2:
            r = u[k] / u[k - 1]
            df[k] = -r * df[k - 1]
            df[k, k] -= f[k - 1] / u[k - 1]
            df[k, k - 1] += r * f[k - 1] / u[k - 1]
        else:
            df[k] = -df[k - 1]
    return df


def y1(u):
    """``U_i = (i+1) u_i u_{i+1} + u_i^2 + (2-i) u_{i-1} u_i``."""
    u = _as_u(u)
    up = _padded(u)
    i = np.arange(1, u.size + 1)
    return (i + 1) * u * up[2:] + u * u + (2 - i) * up[:-2] * u


def y1_jacobian(u):
    u = _as_u(u)
    up = _padded(u)
    m = u.size
    i = np.arange(1, m + 1)
    jac = np.diag((i + 1) * up[2:] + 2 * u + (2 - i) * up[:-2])
    idx = np.arange(m - 1)
    jac[idx, idx + 1] = (idx + 2) * u[:-1]          # d U_i / d u_{i+1}
    jac[idx + 1, idx] = (2 - (idx + 2)) * u[1:]     # d U_{i+1} / d u_i
    return jac


def master_symmetry_y(k, u):
    if k == -1:
        return ym1(u)
    if k == 0:
        return _as_u(u).copy()
    if k == 1:
        return y1(u)
    raise Unsupported(f"no closed form for Y_{k}; use hierarchy.project_field")


def y_field(k, m):
    jac = {-1: ym1_jacobian, 0: lambda u: np.eye(len(u)), 1: y1_jacobian}[k]
    return VectorField(m, lambda u: master_symmetry_y(k, u), jac, index=k, kind="master Y", name=f"Y{k}")


# -- Henon map to the Toda lattice -----------------------------------------

@dataclass(frozen=True)
class TodaPoint:
    a: np.ndarray
    b: np.ndarray


def henon_map(u):
    """``a_i = -sqrt(u_{2i} u_{2i-1}) / 2``, ``b_i = (u_{2i-1} + u_{2i-2}) / 2``."""
    u = _as_u(u)
    m = u.size
    if m % 2 == 0:
        raise ValueError("the Henon map needs an odd number of variables")
    up = _padded(u)
    n = (m + 1) // 2
    prod = u[1::2] * u[0:-1:2]  # u_{2i} u_{2i-1}, i = 1..n-1
    if np.any(prod < 0):
        raise NegativeProduct("Henon map needs u_{2i} u_{2i-1} >= 0")
    a = -0.5 * np.sqrt(prod)
    b = 0.5 * np.array([up[2 * i - 1] + up[2 * i - 2] for i in range(1, n + 1)])
    return TodaPoint(a, b)


def toda_rhs(a, b):
    """``da_i/dt = a_i (b_{i+1} - b_i)``, ``db_i/dt = 2 (a_i^2 - a_{i-1}^2)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ap = np.concatenate(([0.0], a, [0.0]))
    da = a * (b[1:] - b[:-1])
    db = 2.0 * (ap[1:] ** 2 - ap[:-1] ** 2)
    return da, db
