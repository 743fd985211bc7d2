"""Exception hierarchy.

Everything raised on bad *data* derives from :class:`DataError` so the CLI can
map it to exit status 2 in one place.
"""


class MadsError(Exception):
    """Base class for all package errors."""


class DataError(MadsError, ValueError):
    """Input data violates a precondition."""


# metrics-core
class EmptySequence(DataError):
    pass


class DimMismatch(DataError):
    pass


class ZeroNormVector(DataError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"vector {index} has zero norm")


class NonFiniteInput(DataError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"vector {index} has non-finite entries")


class TooFewVectors(DataError):
    pass


class NumericalBoundsViolation(MadsError, ArithmeticError):
    pass


class NotSymmetric(DataError):
    pass


class EigenFailure(MadsError, ArithmeticError):
    def __init__(self, iterations, message=None):
        self.iterations = iterations
        super().__init__(message or f"eigen solver did not converge in {iterations} iterations")


# container formats
class FormatError(DataError):
    """Malformed binary file. ``offset`` is the byte position of the problem, if known."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class CorruptHeader(FormatError):
    pass


class VersionUnsupported(FormatError):
    pass


class ChecksumMismatch(FormatError):
    pass


class DuplicateId(FormatError):
    pass


class InvalidRow(FormatError):
    pass


# training
class InsufficientGroups(DataError):
    pass


class ZeroNormRow(DataError):
    pass


class DegenerateBatch(DataError):
    pass


class NoValidTriplets(DataError):
    pass


class ShapeMismatch(DataError):
    pass


# benchmark
class EmptyDistribution(DataError):
    pass


class InsufficientSpeakers(DataError):
    pass


class InsufficientUtterances(DataError):
    def __init__(self, key, message=None):
        self.key = key
        super().__init__(message or f"not enough utterances for {key!r}")


class InsufficientClasses(DataError):
    pass


# evaluation
class LengthMismatch(DataError):
    pass


class TooFewPoints(DataError):
    pass


class MissingEmbedding(DataError):
    def __init__(self, utterance_id):
        self.utterance_id = utterance_id
        super().__init__(f"no embedding for utterance {utterance_id!r}")


class IncompleteTable(DataError):
    pass


class DegenerateRanking(UserWarning):
    """One side of a rank correlation is constant; rho is reported as 0."""
