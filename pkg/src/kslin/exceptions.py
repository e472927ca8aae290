class NonFiniteValueError(ValueError):
    """A field or observable returned inf/nan at a collocation node."""


class NumericalError(ArithmeticError):
    pass


class DefectiveMatrixError(NumericalError):
    """Eigenvector matrix too ill-conditioned for a modal solution."""


class CarlemanSizeError(MemoryError):
    """Dense Carleman matrix would exceed the configured side limit."""
