"""Numerical certification of the hierarchy identities at sampled points.

Each identity family is a list of named checks; a check maps one sample
point to a scale-free residual ``max|lhs - rhs| / max(1, |lhs|, |rhs|)``.
Failures are data: the suite returns an ``IdentityReport`` rather than
raising.
"""
from dataclasses import asdict, dataclass, field
import itertools

import numpy as np

from . import hierarchy, numeric, realization, uspace
from .fields import (
    PoissonTensorField,
    VectorField,
    lie_bracket_vectors,
    lie_derivative_matrix,
)
from .flow import henon_flat, integrate_volterra

SCHEMA_VERSION = 1
MAX_FAILURES = 10

# Point samplers draw from numpy's PCG64 generator seeded with the suite seed.
U_BOX = (0.2, 2.0)
QP_BOX = (-1.0, 1.0)

TOL_CLOSED = 1e-8
TOL_LIE = 1e-6
TOL_GENERATED = 1e-5


# -- differential-geometric primitives --------------------------------------

def lie_derivative_bivector(X, J, x, cfg=numeric.VERIFY):
    """``L_X J`` at x for a vector field X and a bivector field J."""
    x = np.asarray(x, dtype=float)
    return lie_derivative_matrix(X(x), numeric.jacobian(X, x, cfg), J(x), J.derivative(x, cfg))


def lie_bracket_fields(X, Y, x, cfg=numeric.VERIFY):
    x = np.asarray(x, dtype=float)
    return lie_bracket_vectors(X(x), numeric.jacobian(X, x, cfg), Y(x), numeric.jacobian(Y, x, cfg))


def jacobi_terms(J, x, cfg=numeric.VERIFY):
    """Cyclic sum ``sum_l J^{al} d_l J^{bc} + cyclic(a, b, c)`` and its natural scale."""
    x = np.asarray(x, dtype=float)
    P = J(x)
    dP = J.derivative(x, cfg)
    T = np.einsum("al,bcl->abc", P, dP)
    cyc = T + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)
    scale = np.einsum("al,bcl->abc", np.abs(P), np.abs(dP)).max(initial=0.0)
    return cyc, scale


def jacobi_residual(J, x, cfg=numeric.VERIFY):
    cyc, scale = jacobi_terms(J, x, cfg)
    return float(np.abs(cyc).max(initial=0.0) / max(1.0, scale))


def relative_gap(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = max(1.0, np.abs(lhs).max(initial=0.0), np.abs(rhs).max(initial=0.0))
    return float(np.abs(lhs - rhs).max(initial=0.0) / scale)


def corrupted_tensor(J, a, b):
    """Copy of J with the sign of entry (a, b) (and (b, a)) flipped; a negative control."""
    sign = np.ones((J.dim, J.dim))
    sign[a, b] = sign[b, a] = -1.0
    partials = None
    if J.partials is not None:
        partials = lambda x: J.partials(x) * sign[:, :, None]
    return PoissonTensorField(J.dim, lambda x: J(x) * sign, partials, J.degree, "corrupted", f"{J.name}~")


# -- reports ----------------------------------------------------------------

@dataclass
class IdentityReport:
    identity_id: str
    points_tested: int
    max_residual: float
    tolerance: float
    passed: bool
    failures: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    vacuous: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"v": SCHEMA_VERSION}
        d.update(asdict(self))
        return d


def evaluate(identity_id, checks, points, tolerance, extra=None):
    """Run every check at every point and fold the residuals into a report.

    ``checks`` is a list of ``(name, fn)``; fold order is by point index then
    check order, so reports are reproducible bit for bit.
    """
    per_check = {name: 0.0 for name, _ in checks}
    failures = []
    worst = 0.0
    for k, x in enumerate(points):
        for name, fn in checks:
            r = float(fn(x))
            if not np.isfinite(r):
                r = float("inf")
            per_check[name] = max(per_check[name], r)
            worst = max(worst, r)
            if r > tolerance and len(failures) < MAX_FAILURES:
                failures.append({"point": k, "x": [float(v) for v in x], "check": name, "residual": r})
    return IdentityReport(
        identity_id,
        len(points),
        worst,
        tolerance,
        worst <= tolerance,
        failures,
        per_check,
        vacuous=len(points) == 0,
        extra=extra or {},
    )


# -- samplers ---------------------------------------------------------------

def sample_u(rng, m, count):
    return list(rng.uniform(*U_BOX, size=(count, m)))


def sample_qp(rng, n, count):
    return list(rng.uniform(*QP_BOX, size=(count, 2 * n)))


def sample_leaf(rng, n, count):
    return [realization.realize(x) for x in sample_qp(rng, n, count)]


# -- identity families --------------------------------------------------------

def _jacobi_u(m, cfg):
    ks = [2, 3] + ([1] if m % 2 else []) + ([0] if m == 3 else [])
    return [(f"jacobi pi{k}", lambda x, J=uspace.pi_field(k, m): jacobi_residual(J, x, cfg)) for k in sorted(ks)]


def _jacobi_qp(n, cfg):
    return [
        (f"jacobi J{i}", lambda x, J=hierarchy.tensor_field(i, n): jacobi_residual(J, x, cfg))
        for i in (0, 1, 2, 3, 4, 5)
    ]


def _involution(m):
    ks = [2, 3] + ([1] if m % 2 else [])
    checks = []
    for k in ks:
        def check(u, k=k):
            P = uspace.bracket_pi(k, u)
            grads = [uspace.grad_h(u, i) for i in range(1, m + 1)]
            worst = 0.0
            for gi, gj in itertools.combinations(grads, 2):
                val = gi @ P @ gj
                scale = max(1.0, np.abs(gi) @ np.abs(P) @ np.abs(gj))
                worst = max(worst, abs(val) / scale)
            return worst
        checks.append((f"involution pi{k}", check))
    return checks


def _lenard(m):
    pairs = [(3, 2), (2, 1)] if m % 2 else [(3, 2)]
    if m == 3:
        pairs.append((1, 0))
    checks = []
    for hi, lo in pairs:
        for i in range(1, 5):
            def check(u, hi=hi, lo=lo, i=i):
                return relative_gap(
                    uspace.bracket_pi(hi, u) @ uspace.grad_h(u, i),
                    uspace.bracket_pi(lo, u) @ uspace.grad_h(u, i + 1),
                )
            checks.append((f"pi{hi} dH{i} = pi{lo} dH{i + 1}", check))
    return checks


def ladder_coefficient(i, j):
    """``L_{Y_i} pi_j = (j - i - 2) pi_{i+j}``."""
    return j - i - 2


def _ladder_u(m, cfg):
    checks = []
    ys = [-1, 0, 1] if m % 2 else [0, 1]
    for i in ys:
        Y = uspace.y_field(i, m)
        for j in (1, 2, 3):
            if j == 1 and m % 2 == 0:
                continue
            c = ladder_coefficient(i, j)
            target = i + j
            if c != 0 and not (1 <= target <= 3 or (target == 0 and m == 3)):
                continue
            J = uspace.pi_field(j, m)

            def check(u, Y=Y, J=J, c=c, target=target):
                lhs = lie_derivative_bivector(Y, J, u, cfg)
                rhs = c * uspace.bracket_pi(target, u) if c else np.zeros_like(lhs)
                return relative_gap(lhs, rhs)
            checks.append((f"L_Y{i} pi{j} = {c} pi{target}", check))
        for j in range(1, 6):
            def check(u, Y=Y, i=i, j=j):
                # (i + j) H_{i+j} = Tr L^{i+j}; for i + j = 0 this is m + 1
                return relative_gap(uspace.grad_h(u, j) @ Y(u), uspace.trace_power(u, i + j))
            checks.append((f"Y{i}(H{j}) = Tr L^{i + j}", check))
    for i, j in [(-1, 0), (-1, 1), (0, 1)]:
        if i not in ys:
            continue
        def check(u, i=i, j=j):
            lhs = lie_bracket_fields(uspace.y_field(i, m), uspace.y_field(j, m), u, cfg)
            return relative_gap(lhs, (j - i) * uspace.master_symmetry_y(i + j, u))
        checks.append((f"[Y{i},Y{j}] = {j - i} Y{i + j}", check))
    return checks


def _ladder_qp(n, cfg):
    X1 = realization.x_field(1, n)
    J2, J3 = realization.tensor_j2(n), realization.j3_field(n)
    checks = [
        ("L_X1 J2 = -J3", lambda x: relative_gap(lie_derivative_bivector(X1, J2, x, cfg), -J3(x))),
        ("R N = I", lambda x: relative_gap(
            hierarchy.recursion_operator(x) @ hierarchy.negative_recursion_operator(x), np.eye(2 * n))),
        ("R X0 = X1 - (n-1) chi1", lambda x: relative_gap(
            hierarchy.generate_x(1, x), X1(x) - (n - 1) * hierarchy.generate_flow(1, x))),
    ]
    for i in (0, 1, 2, 3, 4):
        checks.append((f"R J{i} = J{i + 1}", lambda x, i=i: relative_gap(
            hierarchy.recursion_apply_positive(hierarchy.generate_tensor(i, x), x),
            hierarchy.generate_tensor(i + 1, x))))
        checks.append((f"N J{i + 1} = J{i}", lambda x, i=i: relative_gap(
            hierarchy.recursion_apply_negative(hierarchy.generate_tensor(i + 1, x), x),
            hierarchy.generate_tensor(i, x))))
    for i in (2, 3, 4):
        checks.append((f"chi{i} = J2 dh{i}", lambda x, i=i: relative_gap(
            hierarchy.generate_flow(i, x), realization.j2_matrix(n) @ realization.grad_hamiltonian(x, i))))
    return checks


def _oevel_a(n, oevel):
    checks = []
    for i in (0, 1):
        for j in (1, 2, 3):
            c = oevel.hamiltonian_coefficient(i, j)

            def check(x, i=i, j=j, c=c):
                lhs = realization.grad_hamiltonian(x, j) @ hierarchy.generate_x(i, x)
                return relative_gap(lhs, c * hierarchy.generate_h(i + j, x))
            checks.append((f"X{i}(h{j}) = {c:g} h{i + j}", check))
    return checks


def _oevel_b(n, oevel, cfg):
    checks = []
    for i in (0, 1):
        X = hierarchy.x_generated_field(i, n)
        for j in (2, 3):
            c = oevel.tensor_coefficient(i, j)
            J = hierarchy.tensor_field(j, n)

            def check(x, X=X, J=J, c=c, k=i + j):
                lhs = lie_derivative_bivector(X, J, x, cfg)
                return relative_gap(lhs, c * hierarchy.generate_tensor(k, x))
            checks.append((f"L_X{i} J{j} = {c:g} J{i + j}", check))
    return checks


def _oevel_c(n, oevel, cfg):
    checks = []
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        c = oevel.bracket_coefficient(i, j)

        def check(x, i=i, j=j, c=c):
            lhs = lie_bracket_fields(hierarchy.x_generated_field(i, n), hierarchy.x_generated_field(j, n), x, cfg)
            return relative_gap(lhs, c * hierarchy.generate_x(i + j, x))
        checks.append((f"[X{i},X{j}] = {c:g} X{i + j}", check))
    return checks


def _conformal(n, oevel, cfg):
    X0 = realization.x_field(0, n)
    J2, J3 = realization.tensor_j2(n), realization.j3_field(n)
    return [
        (f"L_X0 J2 = {oevel.lam:g} J2", lambda x: relative_gap(lie_derivative_bivector(X0, J2, x, cfg), oevel.lam * J2(x))),
        (f"L_X0 J3 = {oevel.mu:g} J3", lambda x: relative_gap(lie_derivative_bivector(X0, J3, x, cfg), oevel.mu * J3(x))),
        (f"X0(h1) = {oevel.nu:g} h1", lambda x: relative_gap(
            realization.grad_hamiltonian(x, 1) @ X0(x), oevel.nu * realization.hamiltonian_h(x, 1))),
    ]


def _pushforward(n):
    m = 2 * n - 1

    def push_tensor(i, k):
        def check(x):
            Du = realization.realize_jacobian(x)
            return relative_gap(Du @ hierarchy.generate_tensor(i, x) @ Du.T, uspace.bracket_pi(k, realization.realize(x)))
        return check

    def push_field(vec, target):
        def check(x):
            return relative_gap(realization.realize_jacobian(x) @ vec(x), target(realization.realize(x)))
        return check

    checks = [
        ("J2 -> pi2", push_tensor(2, 2)),
        ("J3 -> pi3", push_tensor(3, 3)),
        ("J1 -> pi1", push_tensor(1, 1)),
        ("chi1 -> volterra", push_field(lambda x: hierarchy.generate_flow(1, x), uspace.volterra_rhs)),
        ("X0 -> Y0", push_field(lambda x: realization.symmetry_x(0, x), lambda u: u)),
        ("X1 -> Y1", push_field(lambda x: realization.symmetry_x(1, x), uspace.y1)),
        ("N X0 -> Y-1", push_field(lambda x: hierarchy.generate_x(-1, x), uspace.ym1)),
        ("D^2 = |det L_poly|", lambda x: relative_gap(
            np.exp(2 * realization.split(x)[1].sum()), abs(np.linalg.det(uspace.lax_poly(realization.realize(x)))))),
    ]
    if m == 3:
        checks.append(("J0 -> pi0", push_tensor(0, 0)))
    for i in (1, 2):
        checks.append((f"h{i} = H{i}/2", lambda x, i=i: relative_gap(
            realization.hamiltonian_h(x, i),
            realization.HAMILTONIAN_SCALE * uspace.invariant_h(realization.realize(x), i))))
    return checks


def _isospectral(m, t_end=1.0, dt=1e-3):
    def check(u):
        tr = integrate_volterra(u, t_end, dt)
        return max(tr.max_drift("H"), tr.max_drift("lambda"))
    return [(f"H and spectrum drift over t={t_end:g}, dt={dt:g}", check)]


def _henon_toda(m, cfg):
    def check(u):
        push = numeric.derivative(henon_flat, u, cfg) @ uspace.volterra_rhs(u)
        t = uspace.henon_map(u)
        da, db = uspace.toda_rhs(t.a, t.b)
        return relative_gap(push, np.concatenate((da, db)))
    return [("henon pushforward = toda rhs", check)]


U_FAMILIES = {"jacobi", "involution", "lenard", "ladder-u", "isospectral", "henon-toda"}
QP_FAMILIES = {"jacobi", "ladder-qp", "oevel-a", "oevel-b", "oevel-c", "conformal", "pushforward"}
FAMILIES = sorted(U_FAMILIES | QP_FAMILIES)

FAMILY_TOLERANCE = {
    ("jacobi", "u"): TOL_CLOSED,
    ("jacobi", "qp"): TOL_LIE,
    ("involution", "u"): TOL_CLOSED,
    ("lenard", "u"): 1e-9,
    ("ladder-u", "u"): TOL_LIE,
    ("ladder-qp", "qp"): TOL_LIE,
    ("oevel-a", "qp"): TOL_CLOSED,
    ("oevel-b", "qp"): TOL_LIE,
    ("oevel-c", "qp"): TOL_GENERATED,
    ("conformal", "qp"): TOL_CLOSED,
    ("pushforward", "qp"): 1e-10,
    ("isospectral", "u"): 1e-9,
    ("henon-toda", "u"): TOL_CLOSED,
}


def run_identity_suite(family, *, m=None, n=None, points=100, seed=0, cfg=numeric.VERIFY,
                       oevel=realization.VOLTERRA_OEVEL, tolerance=None):
    """Run one identity family at one size; exactly one of ``m`` (u-space) or ``n`` (qp) is given."""
    if family not in FAMILIES:
        raise KeyError(f"unknown identity family {family!r}; choose from {FAMILIES}")
    if (m is None) == (n is None):
        raise ValueError("give exactly one of m (u-space size) or n (phase-space size)")
    space = "u" if m is not None else "qp"
    if space == "u" and family not in U_FAMILIES:
        raise ValueError(f"family {family!r} runs in (q, p) space; pass n")
    if space == "qp" and family not in QP_FAMILIES:
        raise ValueError(f"family {family!r} runs in u-space; pass m")
    rng = np.random.default_rng(seed)
    extra = {}
    if space == "u":
        if family == "henon-toda" and m % 2 == 0:
            raise ValueError("henon-toda needs odd m")
        pts = sample_u(rng, m, points)
        checks = {
            "jacobi": lambda: _jacobi_u(m, cfg),
            "involution": lambda: _involution(m),
            "lenard": lambda: _lenard(m),
            "ladder-u": lambda: _ladder_u(m, cfg),
            "isospectral": lambda: _isospectral(m),
            "henon-toda": lambda: _henon_toda(m, cfg),
        }[family]()
        size = f"m={m}"
    else:
        pts = sample_qp(rng, n, points)
        checks = {
            "jacobi": lambda: _jacobi_qp(n, cfg),
            "ladder-qp": lambda: _ladder_qp(n, cfg),
            "oevel-a": lambda: _oevel_a(n, oevel),
            "oevel-b": lambda: _oevel_b(n, oevel, cfg),
            "oevel-c": lambda: _oevel_c(n, oevel, cfg),
            "conformal": lambda: _conformal(n, oevel, cfg),
            "pushforward": lambda: _pushforward(n),
        }[family]()
        size = f"n={n}"
        if family.startswith("oevel") or family == "conformal":
            extra["oevel"] = {"lambda": oevel.lam, "mu": oevel.mu, "nu": oevel.nu}
        if family == "pushforward":
            extra["h_over_H"] = realization.HAMILTONIAN_SCALE
    tol = FAMILY_TOLERANCE[(family, space)] if tolerance is None else tolerance
    return evaluate(f"{family}:{size}", checks, pts, tol, extra)
