"""Exception hierarchy.

Two families matter for the CLI exit codes: InputError (exit 1) covers
anything wrong with files, labels, or configuration; NumericalError (exit 2)
covers failures of the numerics themselves.
"""


class ChromalignError(Exception):
    """Base class for all package errors."""


class InputError(ChromalignError):
    """Bad input data, files, or configuration (CLI exit code 1)."""


class ParseError(InputError):
    """Malformed row in an input file; message carries the line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class IntegrityError(InputError):
    """Structurally valid input that violates a dataset-level invariant."""


class NotFoundError(InputError):
    """A requested term, chip, or file entry does not exist."""


class AlignmentError(InputError):
    """Label sets or orders of two structures do not match."""


class ConfigurationError(InputError):
    """Invalid parameter combination (fold counts, empty grids, ...)."""


class NumericalError(ChromalignError):
    """Numerical failure (CLI exit code 2)."""


class UndefinedStatisticError(NumericalError):
    """A statistic is undefined for the given input (constant vector, ...)."""


class NonConvergenceError(NumericalError):
    """Iterative solver hit max_iter; carries the last iterate."""

    def __init__(self, message: str, weights=None, objectives=None):
        super().__init__(message)
        self.weights = weights
        self.objectives = objectives


class ChipExcluded(ChromalignError):
    """Signal: a chip has no retained-term judgments and leaves the dataset."""

    def __init__(self, chip_id: int):
        super().__init__(f"chip {chip_id} has no judgments with retained terms")
        self.chip_id = chip_id
