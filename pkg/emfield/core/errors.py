"""Exception hierarchy. Every class carries the CLI exit code it maps to."""


class EmfieldError(Exception):
    exit_code = 1


class InvalidInputError(EmfieldError, ValueError):
    exit_code = 1


class GridMismatchError(InvalidInputError):
    def __init__(self, what: str = "operands"):
        super().__init__(f"Grid mismatch between {what}")


class IllPosedObjectiveError(InvalidInputError):
    pass


class ManifestValidationError(InvalidInputError):
    """Manifest parsed but describes an impossible scene"""


class DataFormatError(EmfieldError):
    exit_code = 2


class MagicMismatchError(DataFormatError):
    pass


class ChecksumMismatchError(DataFormatError):
    pass


class TruncatedPayloadError(DataFormatError):
    pass


class ManifestError(DataFormatError):
    pass


class ImageFormatError(DataFormatError):
    pass


class NumericalBreakdownError(EmfieldError, ArithmeticError):
    exit_code = 3


class SelfTestFailure(EmfieldError):
    exit_code = 4


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_SELFTEST = 4
