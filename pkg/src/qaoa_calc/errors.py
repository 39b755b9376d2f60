"""Exception types shared across the package.

The CLI maps these onto exit codes: InstanceFormatError -> 2,
SizeLimitError / TermBudgetError -> 3, verification failure -> 4.
"""


class QaoaCalcError(Exception):
    """Base class for package errors."""


class DimensionMismatchError(QaoaCalcError):
    """Operands act on different qubit counts."""


class SizeLimitError(QaoaCalcError):
    """A dense or enumerative path was requested beyond its size limit."""


class TermBudgetError(QaoaCalcError):
    """A Pauli-term computation exceeded its term budget.

    Carries partial statistics so failures are diagnosable rather than silent.
    """

    def __init__(self, message: str, *, terms: int = 0, budget: int = 0, context: str = ""):
        super().__init__(message)
        self.terms = terms
        self.budget = budget
        self.context = context


class DegeneratePadeError(QaoaCalcError):
    """The Pade linear system is singular for the requested orders."""


class InstanceFormatError(QaoaCalcError):
    """An instance file or instance description failed to parse or validate."""
