"""Exception hierarchy shared across the package.

Everything raised on bad data or bad configuration derives from
:class:`PlaceRecError` so callers (and the CLI) can distinguish data
problems from genuine bugs.
"""


class PlaceRecError(Exception):
    """Base class for all errors raised by this package."""


# --- manifest / corpus ---------------------------------------------------


class ParseError(PlaceRecError):
    """Manifest file is malformed (bad header, bad row, bad value)."""


class MissingField(ParseError):
    """A manifest row lacks a required field (id or timestamp)."""


class UnknownLabel(ParseError):
    """A row's label is not in the manifest's class list."""


class InsufficientClassData(PlaceRecError):
    """A class has too few labeled images for the requested split."""


class NoLabeledRecords(PlaceRecError):
    """Statistics requested on a manifest without labeled records."""


class InvalidSpec(PlaceRecError):
    """Synthetic corpus specification violates its constraints."""


# --- features ------------------------------------------------------------


class ImageTooSmall(PlaceRecError):
    """Image smaller than the descriptor patch."""


class NonFiniteInput(PlaceRecError):
    """Input array contains NaN or infinity."""


class TooFewSamples(PlaceRecError):
    """Fewer descriptor samples than requested codebook size."""


class EmptyDescriptorList(PlaceRecError):
    """Quantization called with no descriptors."""


# --- models --------------------------------------------------------------


class TooFewHistograms(PlaceRecError):
    """Fewer training histograms than mixture components."""


class DegenerateComponent(PlaceRecError):
    """A mixture component claims less than one effective sample."""


class NoData(PlaceRecError):
    """Fit called with an empty training set."""


class WindowLargerThanGrid(PlaceRecError):
    """Counting-grid window exceeds the grid extent."""


class EmptyHistogram(PlaceRecError):
    """Operation requires a histogram with at least one count."""


class MissingHistogram(PlaceRecError):
    """A referenced image id has no histogram in the store."""


# --- temporal ------------------------------------------------------------


class DimensionMismatch(PlaceRecError):
    """Observation matrix and HMM parameters disagree on K."""


class NonPositiveLambda(PlaceRecError):
    """Likelihood rescaling factor must be positive."""


class InvalidHyperparameter(PlaceRecError):
    """HMM hyperparameter out of range (kappa < 0, base_alpha <= 0, ...)."""


class NumericalError(PlaceRecError):
    """Probability mass underflowed to zero mid-recursion."""


# --- evaluation ----------------------------------------------------------


class LengthMismatch(PlaceRecError):
    """Prediction and truth sequences differ in length."""


class EmptyInput(PlaceRecError):
    """Metric requested on empty sequences."""


class LabelOutOfRange(PlaceRecError):
    """A label is outside [0, K)."""
