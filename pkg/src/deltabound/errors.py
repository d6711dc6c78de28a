"""Exception hierarchy shared across the package."""


class DeltaBoundError(Exception):
    """Base class for all errors raised by this package."""


class BudgetExhausted(DeltaBoundError):
    """The query ledger has no budget left for another classifier call."""


class DimensionMismatch(DeltaBoundError):
    """An input point does not match the model's feature dimension."""


class ZeroDirection(DeltaBoundError):
    """A direction vector with zero norm cannot be normalized."""


class NoBoundaryFound(DeltaBoundError):
    """The doubling phase never reached an adversarial point along a ray."""


class InitializationFailed(DeltaBoundError):
    """No adversarial starting direction was found within the retry limit."""


class MisclassifiedInput(DeltaBoundError):
    """The attacked point is not classified as its claimed label."""


class DegenerateResidual(DeltaBoundError):
    """The Gram-Schmidt residual is numerically zero."""


class RatioOutOfRange(DeltaBoundError):
    """An improvement ratio outside (0, 1) cannot be recorded."""


class SchemaError(DeltaBoundError):
    """A model interchange file violates the JSON schema."""


class MalformedModel(DeltaBoundError):
    """Model parameters violate a structural invariant."""


class DegenerateData(DeltaBoundError):
    """A training set contains a single class."""


class NegativeFeatures(DeltaBoundError):
    """Multinomial NB requires nonnegative features."""


class NoCorrectPredictions(DeltaBoundError):
    """The model classifies no dataset point correctly."""


class MissingColumn(DeltaBoundError):
    """A required CSV column is absent."""


class ParseError(DeltaBoundError):
    """A CSV cell or row could not be parsed."""


class EmptyList(DeltaBoundError):
    """An aggregate was requested over an empty collection."""


class UnsupportedFamily(DeltaBoundError):
    """The requested model family is not supported."""


class IoError(DeltaBoundError):
    """A file could not be read or written."""
