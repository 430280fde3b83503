"""Exception hierarchy.

Two branches matter for the CLI exit codes: ValidationError (bad data or
bad math inputs, exit 1) and FormatError (unreadable files, exit 2).
"""


class XferScoreError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(XferScoreError):
    """Input data violates a documented precondition."""


class FormatError(XferScoreError):
    """A file could not be decoded as the documented format."""


# --- matrix / label validation ---------------------------------------------

class EmptyMatrix(ValidationError):
    pass


class NegativeEntry(ValidationError):
    def __init__(self, row: int, col: int, value: float):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"negative entry {value!r} at ({row}, {col})")


class RowSumOutOfTolerance(ValidationError):
    def __init__(self, row: int, row_sum: float):
        self.row, self.row_sum = row, row_sum
        super().__init__(f"row {row} sums to {row_sum!r}, more than 1e-3 from 1")


class Empty(ValidationError):
    pass


class OutOfRange(ValidationError):
    def __init__(self, index: int, value: int):
        self.index, self.value = index, value
        super().__init__(f"label {value} at position {index} outside the declared class range")


class MissingClass(ValidationError):
    def __init__(self, label: int):
        self.label = label
        super().__init__(f"class {label} never occurs in the labels")


class LengthMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DegenerateDimension(ValidationError):
    pass


# --- numeric failures --------------------------------------------------------

class NumericalFailure(XferScoreError):
    pass


class NegativeTrace(NumericalFailure):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"pseudo-inverse trace came out {value!r} (< -1e-9); pinv is broken")


class NonFiniteLoss(NumericalFailure):
    pass


# --- statistics --------------------------------------------------------------

class ConstantInput(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class NotBinary(ValidationError):
    pass


class MissingPositiveClass(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


# --- file formats -------------------------------------------------------------

class Malformed(FormatError):
    def __init__(self, where, reason: str):
        # `where` is a 1-based line number for text formats, byte offset for binary
        self.where = where
        self.reason = reason
        super().__init__(f"malformed input at {where}: {reason}")


class DimensionHeaderMismatch(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass
