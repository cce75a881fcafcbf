"""Exception hierarchy shared by every module."""


class FinslerError(Exception):
    """Base class for library errors."""


class SingularEvaluation(FinslerError):
    """A function was evaluated outside its real domain (sqrt/ln of <= 0, 1/0)."""

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message)
        self.value = value


class DomainError(FinslerError):
    """A sample or base point lies outside the metric's declared domain."""


class ConstructionError(FinslerError):
    """A metric or volume specification violates one of its invariants."""


class ExprSyntaxError(FinslerError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DegenerateMetric(FinslerError):
    """The fundamental tensor is singular, indefinite or too badly conditioned."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class QuadratureError(FinslerError):
    """Refinement did not converge."""


class SamplerExhausted(FinslerError):
    pass


class NotProjectivelyFlat(FinslerError):
    pass
