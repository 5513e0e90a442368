"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`ScreeningError`.  The CLI maps the three families below onto its
exit codes (bad input 2, solver failure 3, degenerate data 4).
"""


class ScreeningError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class InvalidArgumentError(ScreeningError, ValueError):
    """Malformed input: wrong shapes, non-finite values, bad parameters."""


class DomainError(InvalidArgumentError):
    """Argument outside the mathematical domain of a function."""


class ConstantColumnError(InvalidArgumentError):
    """One or more predictor columns have zero variance."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("constant predictor column(s): " + ", ".join(self.columns))


class StratificationError(InvalidArgumentError):
    """A class has too few members for the requested number of folds."""


class UndefinedAUCError(InvalidArgumentError):
    """AUC requested on labels containing a single class."""


class SelectionError(InvalidArgumentError):
    """No grid point satisfies the support-size cap."""


class DegenerateDataError(ScreeningError):
    """The response carries no linear signal (delta0 == 0)."""

    exit_code = 4


class SolverFailure(ScreeningError):
    """An LP solve did not reach optimality where it must."""

    exit_code = 3

    def __init__(self, message, delta=None, status=None):
        self.delta = delta
        self.status = status
        super().__init__(message)


class RefitFailedError(ScreeningError):
    """Unpenalized logistic refit diverged (separation) or did not converge."""

    exit_code = 3


class InfeasibleAtResolutionError(ScreeningError):
    """Brute-force oracle found no feasible point on its grid."""

    exit_code = 3
