"""Symplectic realization of the Volterra lattice on R^{2n}.

A phase point is the flat array ``x = (q_1..q_n, p_1..p_n)``. The map
``u_{2i-1} = -exp(p_i)``, ``u_{2i} = exp(q_{i+1} - q_i)`` sends it to a
Volterra point with ``m = 2n - 1`` variables; the canonical tensor J2 goes to
the quadratic bracket and J3 to the cubic one.

Every closed-form object here (h1, h2, J3, X1) is a finite sum of
exponentials of linear forms, so it is stored as a table of
``(slot, coefficient, weights)`` terms and evaluated together with its exact
partial derivatives.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import uspace
from .errors import DomainViolation
from .fields import PoissonTensorField, VectorField

# h_i = HAMILTONIAN_SCALE * H_i o realize. The closed forms of h1 and h2 satisfy
# this with 1/2 (checked by the ratio test in the suite).
HAMILTONIAN_SCALE = 0.5


@dataclass(frozen=True)
class OevelConstants:
    """Conformal weights: ``L_X0 J2 = lam J2``, ``L_X0 J3 = mu J3``, ``X0(h1) = nu h1``.

    Oevel's relations are stated for a base pair labelled (1, 2); here the pair
    is (J2, J3), so tensor labels are shifted by ``tensor_offset``.
    """

    lam: float = 0.0
    mu: float = 1.0
    nu: float = 1.0
    tensor_offset: int = 1

    def hamiltonian_coefficient(self, i, j):
        """``X_i(h_j) = c h_{i+j}``."""
        return self.nu + (j - 1 + i) * (self.mu - self.lam)

    def tensor_coefficient(self, i, j):
        """``L_{X_i} J_j = c J_{i+j}``."""
        jo = j - self.tensor_offset
        return self.mu + (jo - i - 2) * (self.mu - self.lam)

    def bracket_coefficient(self, i, j):
        """``[X_i, X_j] = c X_{i+j}``."""
        return (self.mu - self.lam) * (j - i)


VOLTERRA_OEVEL = OevelConstants()


def split(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size % 2 or x.size < 4:
        raise ValueError(f"phase point must have even length 2n >= 4, got shape {x.shape}")
    n = x.size // 2
    return x[:n], x[n:]


# -- exponential term tables ------------------------------------------------

class _ExpSum:
    """``out[slot] = sum coef * exp(w . x)`` over a fixed term table."""

    def __init__(self, shape, terms, dim):
        self.shape = shape
        self.dim = dim
        if terms:
            slots, coefs, weights = zip(*terms)
            self.slots = tuple(np.array(s) for s in zip(*slots))
            self.coefs = np.array(coefs, dtype=float)
            self.weights = np.array(weights, dtype=float)
        else:
            self.slots = tuple(np.zeros(0, dtype=int) for _ in shape)
            self.coefs = np.zeros(0)
            self.weights = np.zeros((0, dim))

    def _terms(self, x):
        return self.coefs * np.exp(self.weights @ x)

    def value(self, x):
        if not self.shape:
            return float(self._terms(x).sum())
        out = np.zeros(self.shape)
        np.add.at(out, self.slots, self._terms(x))
        return out

    def derivative(self, x):
        if not self.shape:
            return self._terms(x) @ self.weights
        out = np.zeros(self.shape + (self.dim,))
        np.add.at(out, self.slots, self._terms(x)[:, None] * self.weights)
        return out


def _w(n, q=(), p=()):
    """Weight vector of ``exp(sum s q_i + sum s p_i)`` from (index, sign) pairs (1-based)."""
    w = np.zeros(2 * n)
    for i, s in q:
        w[i - 1] += s
    for i, s in p:
        w[n + i - 1] += s
    return w


def _ep(n, i):
    return _w(n, p=[(i, 1)])


def _eq(n, i):
    """exp(q_{i+1} - q_i), i.e. the even variable u_{2i}."""
    return _w(n, q=[(i + 1, 1), (i, -1)])


@lru_cache(maxsize=None)
def _j3_table(n):
    Q = lambda i: i - 1
    P = lambda i: n + i - 1
    upper = []

    def add(a, b, c, w):
        upper.append(((a, b), c, w))
        upper.append(((b, a), -c, w))

    for i in range(1, n + 1):
        for j in range(1, i):
            add(Q(i), Q(j), 1.0, _ep(n, j))
        add(Q(i), P(i), -1.0, _ep(n, i))
        if i >= 2:
            add(Q(i), P(i), 1.0, _eq(n, i - 1))
        for j in range(1, i):
            if j >= 2:
                add(Q(i), P(j), 1.0, _eq(n, j - 1))
            if j + 1 <= n:
                add(Q(i), P(j), -1.0, _eq(n, j))
        if i < n:
            add(P(i), P(i + 1), 1.0, _eq(n, i))
    return _ExpSum((2 * n, 2 * n), upper, 2 * n)


@lru_cache(maxsize=None)
def _x1_table(n):
    terms = []
    for i in range(1, n + 1):
        a = (i - 1,)
        if i >= 2:
            terms.append((a, -1.0, _ep(n, 1)))
        for j in range(2, i):
            terms.append((a, -1.0, _ep(n, j)))
        terms.append((a, 1.0 - 2 * i, _ep(n, i)))
        for j in range(1, i):
            terms.append((a, 1.0, _eq(n, j)))
        b = (n + i - 1,)
        if i < n:
            terms.append((b, 2.0 * i, _eq(n, i)))
        terms.append((b, -1.0, _ep(n, i)))
        if i >= 2:
            terms.append((b, 3.0 - 2 * i, _eq(n, i - 1)))
    return _ExpSum((2 * n,), terms, 2 * n)


@lru_cache(maxsize=None)
def _h_table(n, i):
    if i == 1:
        terms = [((), -1.0, _ep(n, k)) for k in range(1, n + 1)]
        terms += [((), 1.0, _eq(n, k)) for k in range(1, n)]
    elif i == 2:
        terms = [((), 0.5, 2 * _ep(n, k)) for k in range(1, n + 1)]
        terms += [((), 0.5, 2 * _eq(n, k)) for k in range(1, n)]
        for k in range(1, n):
            terms.append(((), -1.0, _ep(n, k) + _eq(n, k)))
            terms.append(((), -1.0, _ep(n, k + 1) + _eq(n, k)))
    else:
        raise ValueError("closed-form Hamiltonians exist for i = 1, 2 only")
    return _ExpSum((), terms, 2 * n)


# -- the realization map ----------------------------------------------------

def realize(x):
    q, p = split(x)
    n = q.size
    u = np.empty(2 * n - 1)
    u[0::2] = -np.exp(p)
    u[1::2] = np.exp(q[1:] - q[:-1])
    return u


def realize_jacobian(x):
    """Du, shape (2n-1, 2n)."""
    q, p = split(x)
    n = q.size
    u = realize(x)
    D = np.zeros((2 * n - 1, 2 * n))
    for i in range(n):
        D[2 * i, n + i] = u[2 * i]
    for i in range(n - 1):
        D[2 * i + 1, i + 1] = u[2 * i + 1]
        D[2 * i + 1, i] = -u[2 * i + 1]
    return D


def on_leaf(u):
    u = np.asarray(u, dtype=float)
    return u.size % 2 == 1 and bool(np.all(u[0::2] < 0) and np.all(u[1::2] > 0))


def preimage(u, q1=0.0):
    """Section of ``realize`` with the gauge ``q_1 = q1``."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size % 2 == 0 or u.size < 3:
        raise DomainViolation(f"realization leaf needs odd m >= 3, got {u.size} components")
    if not on_leaf(u):
        raise DomainViolation("u is off the realization leaf (need u_odd < 0 < u_even)")
    p = np.log(-u[0::2])
    q = q1 + np.concatenate(([0.0], np.cumsum(np.log(u[1::2]))))
    return np.concatenate((q, p))


# -- Hamiltonians -----------------------------------------------------------

def hamiltonian_h(x, i):
    """Closed-form h1 and h2 for i in {1, 2}; the pullback ``H_i / 2`` otherwise."""
    q, _ = split(x)
    if i in (1, 2):
        return float(_h_table(q.size, i).value(np.asarray(x, dtype=float)))
    return HAMILTONIAN_SCALE * uspace.invariant_h(realize(x), i)


def grad_hamiltonian(x, i):
    if i in (1, 2):
        q, _ = split(x)
        return _h_table(q.size, i).derivative(np.asarray(x, dtype=float))
    return HAMILTONIAN_SCALE * realize_jacobian(x).T @ uspace.grad_h(realize(x), i)


# -- tensors ----------------------------------------------------------------

def j2_matrix(n):
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def tensor_j2(n):
    J = j2_matrix(n)
    zero = np.zeros((2 * n,) * 3)
    return PoissonTensorField(2 * n, lambda x: J.copy(), lambda x: zero.copy(), degree=2, name="J2")


def tensor_j3(x):
    q, _ = split(x)
    return _j3_table(q.size).value(np.asarray(x, dtype=float))


def j3_partials(x):
    q, _ = split(x)
    return _j3_table(q.size).derivative(np.asarray(x, dtype=float))


def j3_field(n):
    return PoissonTensorField(2 * n, tensor_j3, j3_partials, degree=3, name="J3")


# -- symmetries -------------------------------------------------------------

def symmetry_x(k, x):
    """Conformal symmetry X0 (k = 0) or the closed-form master symmetry X1 (k = 1)."""
    q, _ = split(x)
    n = q.size
    if k == 0:
        return np.concatenate((np.arange(1.0, n + 1), np.ones(n)))
    if k == 1:
        return _x1_table(n).value(np.asarray(x, dtype=float))
    raise ValueError("closed forms exist for X0 and X1 only; see hierarchy.generate_x")


def symmetry_x_jacobian(k, x):
    q, _ = split(x)
    n = q.size
    if k == 0:
        return np.zeros((2 * n, 2 * n))
    if k == 1:
        return _x1_table(n).derivative(np.asarray(x, dtype=float))
    raise ValueError("closed forms exist for X0 and X1 only")


def x_field(k, n):
    return VectorField(
        2 * n,
        lambda x: symmetry_x(k, x),
        lambda x: symmetry_x_jacobian(k, x),
        index=k,
        kind="conformal" if k == 0 else "master X",
        name=f"X{k}",
    )


def hamiltonian_field(n):
    """chi_1 = J2 grad h1, the lifted Volterra flow."""
    J = j2_matrix(n)

    def rhs(x):
        return J @ grad_hamiltonian(x, 1)

    def jac(x):
        return J @ _h_hessian1(x)

    return VectorField(2 * n, rhs, jac, index=1, kind="flow", name="chi1")


def _h_hessian1(x):
    q, _ = split(x)
    t = _h_table(q.size, 1)
    return (t.weights.T * t._terms(np.asarray(x, dtype=float))) @ t.weights
