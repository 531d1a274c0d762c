"""Small dense linear algebra and finite-difference differentiation.

Matrices are plain ``numpy`` arrays. Derivative arrays put the
differentiation index last: for an array-valued ``F`` the result ``dF`` has
``dF[..., c] = dF/dx_c``.
"""
from dataclasses import dataclass
import warnings

import numpy as np
import scipy.linalg

from .errors import EvaluationDomain, NotSymmetric, SingularMatrix


@dataclass(frozen=True)
class DiffConfig:
    fd_step_scale: float = 6e-6
    richardson: bool = False
    singular_threshold: float = 1e-12

    def __post_init__(self):
        if not self.fd_step_scale > 0:
            raise ValueError("fd_step_scale must be positive")
        if not self.singular_threshold > 0:
            raise ValueError("singular_threshold must be positive")


DEFAULT = DiffConfig()
# Richardson-extrapolated central differences need a coarser base step to
# keep roundoff (eps/h) below the h**4 truncation term.
VERIFY = DiffConfig(fd_step_scale=1e-3, richardson=True)


def antisymmetric(upper):
    """Build an exactly antisymmetric matrix from its strict upper triangle."""
    a = np.triu(np.asarray(upper, dtype=float), 1)
    return a - a.T


def solve_linear(A, B, cfg=DEFAULT):
    """Solve ``A X = B`` by LU with partial pivoting.

    Raises SingularMatrix when the smallest pivot is below
    ``cfg.singular_threshold * ||A||_inf``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"row mismatch: A {A.shape}, B {B.shape}")
    norm = np.abs(A).sum(axis=1).max() if A.size else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivots = np.diag(lu)
    if norm == 0.0 or np.abs(pivots).min() < cfg.singular_threshold * norm:
        swaps = np.count_nonzero(piv != np.arange(len(piv)))
        det = float((-1) ** swaps * np.prod(pivots))
        raise SingularMatrix(
            f"matrix is numerically singular (|det| = {abs(det):.3e})",
            determinant=det,
        )
    return scipy.linalg.lu_solve((lu, piv), B, check_finite=False)


def eigenvalues_symmetric(A, rtol=1e-12):
    """Ascending eigenvalues of a symmetric matrix."""
    A = np.asarray(A, dtype=float)
    scale = max(1.0, np.abs(A).max(initial=0.0))
    if np.abs(A - A.T).max(initial=0.0) > rtol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    return np.linalg.eigvalsh(0.5 * (A + A.T))


def _evaluate(f, x):
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            y = np.asarray(f(x), dtype=float)
    except (ZeroDivisionError, FloatingPointError) as exc:
        raise EvaluationDomain(f"function undefined at probe point: {exc}") from exc
    if not np.all(np.isfinite(y)):
        raise EvaluationDomain("function returned non-finite values at probe point")
    return y


def _central(f, x, h):
    cols = []
    for c in range(x.size):
        e = np.zeros_like(x)
        e[c] = h[c]
        cols.append((_evaluate(f, x + e) - _evaluate(f, x - e)) / (2.0 * h[c]))
    return np.stack(cols, axis=-1)


def derivative(f, x, cfg=DEFAULT):
    """Central-difference derivative of an array-valued function.

    The step for coordinate ``c`` is ``fd_step_scale * max(1, |x_c|)``. With
    ``cfg.richardson`` the h and h/2 estimates are combined to cancel the h**2
    error term.
    """
    x = np.asarray(x, dtype=float)
    h = cfg.fd_step_scale * np.maximum(1.0, np.abs(x))
    d = _central(f, x, h)
    if cfg.richardson:
        d = (4.0 * _central(f, x, h / 2.0) - d) / 3.0
    return d


def jacobian(f, x, cfg=DEFAULT):
    """Jacobian ``J[a, c] = df_a/dx_c``.

    ``f`` may be a plain callable or any object with ``eval`` and an optional
    analytic ``jacobian`` attribute (see ``VectorField``); the analytic form is
    used whenever present.
    """
    analytic = getattr(f, "jacobian", None)
    if analytic is not None:
        return np.asarray(analytic(np.asarray(x, dtype=float)), dtype=float)
    fn = getattr(f, "eval", f)
    return derivative(fn, x, cfg)
