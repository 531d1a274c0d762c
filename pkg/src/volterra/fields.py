"""Containers for vector fields and Poisson tensor fields.

Both are immutable wrappers around pure point-evaluation functions, with
optional analytic derivatives. When no analytic derivative is supplied, the
finite-difference engine in ``numeric`` is used.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numeric


def lie_derivative_matrix(X, dX, J, dJ):
    """``(L_X J)^{ab} = X^c d_c J^{ab} - d_c X^a J^{cb} - d_c X^b J^{ac}``.

    Takes the field value ``X``, its Jacobian ``dX``, the bivector ``J`` and
    its partials ``dJ`` (differentiation index last), all at one point.
    """
    return dJ @ X - dX @ J - J @ dX.T


def lie_bracket_vectors(X, dX, Y, dY):
    """``[X, Y]^a = X^c d_c Y^a - Y^c d_c X^a``."""
    return dY @ X - dX @ Y


@dataclass(frozen=True)
class VectorField:
    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    index: Optional[int] = None
    kind: str = ""
    name: str = ""

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def derivative(self, x, cfg=numeric.DEFAULT):
        return numeric.jacobian(self, x, cfg)


@dataclass(frozen=True)
class PoissonTensorField:
    """Bivector field. ``partials(x)[a, b, c]`` is ``d J^{ab} / dx_c``."""

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    degree: Optional[int] = None
    provenance: str = "closed-form"
    name: str = ""

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def derivative(self, x, cfg=numeric.DEFAULT):
        x = np.asarray(x, dtype=float)
        if self.partials is not None:
            return np.asarray(self.partials(x), dtype=float)
        return numeric.derivative(self.eval, x, cfg)

    def scaled(self, c, name=""):
        """The field ``c * J``; handy for stating identities like ``L_X J = c J'``."""
        partials = None
        if self.partials is not None:
            partials = lambda x, p=self.partials: c * p(x)
        return PoissonTensorField(
            self.dim,
            lambda x, f=self.eval: c * f(x),
            partials,
            self.degree,
            self.provenance,
            name or f"{c}*{self.name}",
        )
