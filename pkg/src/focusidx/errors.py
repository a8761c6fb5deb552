"""Exception hierarchy shared by all focusidx modules."""


class FocusError(Exception):
    """Base class for all focusidx errors."""


class UsageError(FocusError):
    """Bad arguments or parameters supplied by the caller."""


class DataError(FocusError):
    """Malformed or inconsistent input data / files."""


# -- configuration ----------------------------------------------------------

class UnknownProfile(UsageError):
    pass


class KOutOfRange(UsageError):
    pass


class NonPositiveM(UsageError):
    pass


# -- classifiers ------------------------------------------------------------

class MissingTrueClass(DataError):
    pass


class EmptyHistogram(UsageError):
    pass


# -- clustering / ingest ----------------------------------------------------

class DimensionMismatch(DataError):
    pass


class SignatureLengthMismatch(DataError):
    pass


# -- index ------------------------------------------------------------------

class DuplicateClusterId(DataError):
    pass


class FormatVersionMismatch(DataError):
    pass


class ChecksumMismatch(DataError):
    pass


# -- query ------------------------------------------------------------------

class KxTooLarge(UsageError):
    pass


class UnknownClass(UsageError):
    pass


class NonMonotoneSchedule(UsageError):
    pass


# -- tuner ------------------------------------------------------------------

class EmptySample(UsageError):
    pass


class NoViableConfig(FocusError):
    """No grid point meets the precision/recall targets on this stream."""


class EmptyViableSet(UsageError):
    pass


# -- simharness -------------------------------------------------------------

class InvalidSpec(UsageError):
    pass
