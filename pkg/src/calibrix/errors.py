"""Exception types shared across the package."""


class CalibrixError(Exception):
    pass


class ConstraintViolation(CalibrixError, ValueError):
    """A parameter constraint of one of the constructions does not hold.

    ``constraint`` carries the human readable inequality that failed.
    """

    def __init__(self, constraint, detail=""):
        self.constraint = constraint
        msg = f"violates {constraint}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class HypothesisError(CalibrixError, ValueError):
    """The harmonic input does not satisfy the structural hypotheses."""


class DomainError(CalibrixError, ValueError):
    pass


class NoConvergence(CalibrixError, ArithmeticError):
    pass


class QuadratureFailure(CalibrixError, ArithmeticError):
    pass
