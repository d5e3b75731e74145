"""Exception types shared across the package."""


class IdentWVError(Exception):
    """Base class for all identwv errors."""


class DegenerateSignal(IdentWVError):
    """Signal has zero midrange-centered energy; NSR scaling is undefined."""


class StrideMismatch(IdentWVError):
    """Subsampling stride does not divide the grid interval count."""


class OrderTooHigh(IdentWVError):
    """Requested derivative order breaks boundary vanishing of a test function."""


class NoValidCenters(IdentWVError):
    """No test-function support fits strictly inside the domain."""


class DimensionMismatch(IdentWVError):
    """Operand shapes are inconsistent."""


class UnsupportedEquation(IdentWVError):
    """Unknown benchmark equation identifier."""


class MissingFeature(IdentWVError):
    """The feature library lacks a term required by the ground truth."""


class UnstableStep(IdentWVError):
    """Explicit time step fails the stability audit."""


class EmptySupport(IdentWVError):
    """No features survive voting; recovery has nothing to fit."""


class ZeroTruth(IdentWVError):
    """Scoring was requested against an all-zero truth vector."""


class EmptyTable(IdentWVError):
    """Plotting was requested for an empty result table."""


class FormatError(IdentWVError):
    """Malformed identwv data or config file."""
