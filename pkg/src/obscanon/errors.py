"""Exception hierarchy shared across the package."""


class ObscanonError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(ObscanonError, ValueError):
    """Operand dimensions do not fit the operation."""


class SingularMatrixError(ObscanonError, ArithmeticError):
    """LU elimination met a pivot below the singularity threshold."""

    def __init__(self, pivot_index, message=None):
        self.pivot_index = pivot_index
        super().__init__(message or f"matrix is singular (pivot {pivot_index})")


class NumericOverflowError(ObscanonError, ArithmeticError):
    pass


class ConjugacyError(ObscanonError, ValueError):
    """A complex root was supplied without its conjugate."""


class NotObservableError(ObscanonError):
    def __init__(self, rank, n):
        self.rank = rank
        self.n = n
        self.rank_deficit = n - rank
        super().__init__(
            f"system is not observable: rank(O) = {rank} < n = {n} "
            f"(deficit {n - rank})"
        )


class FormValidationError(ObscanonError, ValueError):
    """Matrix does not have the expected companion structure.

    ``offending`` lists ``(row, col, value, expected)`` tuples.
    """

    def __init__(self, offending, message=None):
        self.offending = list(offending)
        if message is None:
            shown = ", ".join(
                f"({i},{j})={v:.3g} expected {e:g}" for i, j, v, e in self.offending[:8]
            )
            message = f"not in companion form; offending entries: {shown}"
        super().__init__(message)


class InternalConsistencyError(ObscanonError, AssertionError):
    """A transform and its cached inverse disagree."""


class MissingInputMatrixError(ObscanonError, ValueError):
    pass


class DivergenceError(ObscanonError, ArithmeticError):
    def __init__(self, step):
        self.step = step
        super().__init__(f"non-finite state encountered at step {step}")


class UndefinedRateError(ObscanonError, ValueError):
    pass


class ParseError(ObscanonError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(ObscanonError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
