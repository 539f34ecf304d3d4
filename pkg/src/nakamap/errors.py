"""Exception types raised across the package.

Everything derives from :class:`NakamapError` so callers can catch the whole
family with one clause; the CLI does exactly that and turns each into a
single stderr line plus a nonzero exit code.
"""


class NakamapError(Exception):
    """Base class for all errors raised by this package."""


# --- image container / file I/O -------------------------------------------

class MissingFile(NakamapError):
    """Header or payload file does not exist."""


class MalformedHeader(NakamapError):
    """Header JSON is unparseable or carries invalid/unsupported fields."""


class PayloadSizeMismatch(NakamapError):
    """Payload byte count does not match width*height*4."""


class NonFiniteValue(NakamapError):
    """A value violates the image kind's range (NaN/inf anywhere, or a
    negative value where the kind requires nonnegative data)."""


class IoFailure(NakamapError):
    """Operating-system level read/write failure."""


class DegenerateRange(NakamapError):
    """Rendering window with lo >= hi."""


# --- envelope ---------------------------------------------------------------

class AxialTooShort(NakamapError):
    """RF frame has fewer than 4 samples along the axial direction."""


# --- distribution / estimation ---------------------------------------------

class NegativeArgument(NakamapError):
    """Envelope amplitude argument below zero."""


class NonPositiveArgument(NakamapError):
    """Gamma-family special function evaluated at z <= 0."""


class TooFewSamples(NakamapError):
    """Estimator needs at least two samples."""


class ContainsZeroOnly(NakamapError):
    """Sample set holds no strictly positive value."""


class ExcessiveZeros(NakamapError):
    """More than 10% of the sample set is exactly zero."""


class DegenerateSample(NakamapError):
    """Sample statistics carry no shape information (all positives equal /
    zero variance)."""


# --- parametric mapping ------------------------------------------------------

class OutOfBounds(NakamapError):
    """Kernel center lies outside the image."""


class ImageTooSmall(NakamapError):
    """Image cannot accommodate the requested kernel size(s)."""


class EmptyKernelSet(NakamapError):
    """Kernel specification resolves to no sizes."""


# --- phantom ------------------------------------------------------------------

class InvalidSpec(NakamapError):
    """Phantom specification is internally inconsistent."""


class DensityOutOfRange(NakamapError):
    """Scatterer density outside [0.001, 1.0]."""


# --- evaluation ----------------------------------------------------------------

class DimensionMismatch(NakamapError):
    """Estimate, truth, and label maps must share one shape."""
