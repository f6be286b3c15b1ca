"""Exception hierarchy.

Every domain failure derives from :class:`GeometryError` so the CLI can map
them to exit status 2 and print the class name.
"""


class GeometryError(Exception):
    """Base class for domain errors."""


class InvalidMeasure(GeometryError, ValueError):
    pass


class DimensionMismatch(GeometryError, ValueError):
    pass


class MassMismatch(GeometryError, ValueError):
    pass


class DegenerateMeasure(GeometryError):
    """Measure supported on a hyperplane, or not centered when it must be."""


class HemisphereConcentration(GeometryError):
    pass


class UnboundedBody(GeometryError):
    pass


class EmptyBody(GeometryError):
    pass


class OriginOnSingularBoundary(GeometryError):
    pass


class OriginNotContained(GeometryError):
    pass


class OriginNotInterior(GeometryError):
    pass


class ExcludedExponent(GeometryError, ValueError):
    pass


class NoConvergence(GeometryError):
    """Raised by the solvers; ``report`` carries the best iterate."""

    def __init__(self, message, report=None, atom=None):
        super().__init__(message)
        self.report = report
        self.atom = atom


class NormalizationRequired(GeometryError, ValueError):
    pass


class InsufficientData(GeometryError, ValueError):
    pass
