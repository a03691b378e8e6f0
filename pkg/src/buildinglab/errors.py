"""Exception hierarchy shared by all modules."""


class LabError(Exception):
    """Base class for every error raised by buildinglab."""


# scalars
class NotPrime(LabError, ValueError):
    pass


class OrderTooLarge(LabError, ValueError):
    pass


class NoIrreducibleFound(LabError, RuntimeError):
    pass


class DivisionByZero(LabError, ZeroDivisionError):
    pass


class FieldMismatch(LabError, TypeError):
    pass


# linear algebra / spectra
class NotSymmetric(LabError, ValueError):
    pass


class NoConvergence(LabError, RuntimeError):
    pass


class StructureMismatch(LabError, RuntimeError):
    pass


class Disconnected(LabError, ValueError):
    pass


class NotMeanZero(LabError, ValueError):
    pass


# model spaces
class InvalidPoint(LabError, ValueError):
    pass


class InvalidIsometry(LabError, ValueError):
    pass


class NumericalDegeneracy(LabError, ArithmeticError):
    pass


# complexes
class MalformedInput(LabError, ValueError):
    pass


class BadHolonomy(LabError, ValueError):
    pass


class ClassViolation(LabError, ValueError):
    pass


class LinkMismatch(LabError, ValueError):
    pass


class MissingLambda(LabError, KeyError):
    pass


# indefinite forms
class DimensionError(LabError, ValueError):
    pass


class ConstraintViolated(LabError, ValueError):
    """A block constraint failed; ``constraint`` names it, ``residual`` measures it."""

    def __init__(self, constraint, residual):
        super().__init__(f"{constraint} violated (residual {residual:.3e})")
        self.constraint = constraint
        self.residual = residual


class RankDeficient(LabError, ValueError):
    pass


# apartment
class RankTooLarge(LabError, ValueError):
    pass
