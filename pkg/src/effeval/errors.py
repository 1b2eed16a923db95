"""Exception taxonomy shared by all modules.

Every failure mode surfaced to callers has a dedicated class so that the CLI
can map errors to exit codes and tests can assert on the exact condition.
"""


class EffevalError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# document / embedding validation

class EmptyDocumentError(EffevalError):
    """No token with positive weight remains after filtering."""


class DimensionMismatchError(EffevalError):
    """Shapes disagree: embedding rows vs tokens, or dim vs dim."""


class NonFiniteValueError(EffevalError):
    """A NaN or infinity was encountered where finite values are required."""


class ZeroVectorError(EffevalError):
    """Cosine similarity requested against an all-zero embedding row."""


# ---------------------------------------------------------------------------
# transport

class SolverFailureError(EffevalError):
    """The exact transport solver could not certify optimality."""


# ---------------------------------------------------------------------------
# statistics

class ZeroVarianceError(EffevalError):
    """Correlation undefined: one side of the sample is constant."""


# ---------------------------------------------------------------------------
# file formats

class BadMagicError(EffevalError):
    """File does not start with the expected magic bytes."""


class CrcMismatchError(EffevalError):
    """Payload checksum does not match the trailing CRC32."""


class TruncatedPayloadError(EffevalError):
    """File ended before the declared payload was complete."""


class VersionUnsupportedError(EffevalError):
    """Container declares a format version this reader does not speak."""


class ColumnCountError(EffevalError):
    """Segments line does not have exactly the required column count."""


class BadScoreError(EffevalError):
    """Human score field is neither empty nor a decimal number."""


class IdfFormatError(EffevalError):
    """IDF statistics file is not the expected JSON shape."""


class RemapFormatError(EffevalError):
    """Remap matrix file is malformed."""


class LmFormatError(EffevalError):
    """Language-model penalty file is malformed."""


class MissingPenaltyError(EffevalError):
    """A segment key has no language-model penalty entry."""


class AlignmentError(EffevalError):
    """Container, manifest and segments file disagree on segment count."""


# ---------------------------------------------------------------------------
# benchmarking

class ProbeUnavailableError(EffevalError):
    """The instrumented allocation layer cannot be installed."""


class NonPositiveError(EffevalError):
    """A strictly positive quantity was zero or negative."""


class BatchVarianceError(EffevalError):
    """Metric values changed with batch size; batching must be value-neutral."""
