"""Exception types shared across the package."""


class VolterraError(Exception):
    """Base class for every error raised by this package."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class SingularMatrix(VolterraError):
    code = "singular_matrix"

    def __init__(self, message, determinant=None):
        super().__init__(message)
        self.determinant = determinant

    def to_dict(self):
        d = super().to_dict()
        d["determinant"] = self.determinant
        return d


class NotSymmetric(VolterraError):
    code = "not_symmetric"


class EvaluationDomain(VolterraError):
    """A function was evaluated where it is undefined (e.g. division by zero)."""

    code = "evaluation_domain"


class DomainViolation(VolterraError):
    """A point is off the realization leaf (wrong sign pattern)."""

    code = "domain_violation"


class NegativeProduct(VolterraError):
    code = "negative_product"


class Unsupported(VolterraError):
    code = "unsupported"


class NonFinite(VolterraError):
    code = "non_finite"

    def __init__(self, message, last_time=None):
        super().__init__(message)
        self.last_time = last_time

    def to_dict(self):
        d = super().to_dict()
        d["last_valid_time"] = self.last_time
        return d


class AntisymmetryViolation(VolterraError):
    code = "antisymmetry_violation"
