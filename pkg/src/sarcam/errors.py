"""Exception types shared across the sarcam package.

Every error message names the offending manifest key, file, or argument so
that failures are actionable without a debugger.
"""


class SarcamError(Exception):
    """Base class for all sarcam errors."""


class BundleError(SarcamError):
    """Base class for activation-bundle loading/validation failures."""


class MissingFile(BundleError):
    pass


class InvalidManifest(BundleError):
    pass


class ShapeMismatch(BundleError):
    pass


class NonFiniteValue(BundleError):
    pass


class UnsupportedDType(BundleError):
    pass


class UnsupportedFormat(BundleError):
    pass


class IoFailure(SarcamError):
    pass


class BadIntermediateSize(SarcamError):
    """Requested intermediate grid side falls outside [grid_side, image_side]."""


class BadFraction(SarcamError):
    """Threshold fraction outside the half-open interval (0, 1]."""


class OutOfBounds(SarcamError):
    """Bounding box does not fit inside the target image."""
