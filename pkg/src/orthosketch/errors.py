"""Exception hierarchy shared by all orthosketch modules."""


class ModelingError(Exception):
    """Base class for all orthosketch errors."""


class DegenerateDepthError(ModelingError):
    """Projection denominator is (numerically) zero."""


class EpipolarViolationError(ModelingError):
    """Two view points disagree in y beyond the allowed tolerance."""


class DomainParameterError(ModelingError):
    """Curve parameter outside its valid domain."""


class SingularSystemError(ModelingError):
    """Interpolation or editing system has no unique solution."""


class UnsupportedFormatError(ModelingError):
    """Image file is not an 8-bit grayscale or RGBA PNG."""


class EmptyEdgeMapError(ModelingError):
    """Query against an edge map with no points."""


class NoEdgeInCorridorError(ModelingError):
    """A boundary ray found no edge candidate on one side."""

    def __init__(self, message, view=None, direction=None):
        super().__init__(message)
        self.view = view
        self.direction = direction


class OutOfBoundsError(ModelingError):
    """Stroke key point lies outside the view image."""


class UnknownIdError(ModelingError):
    """Referenced part, stroke, or key-point index does not exist."""


class AttachmentError(ModelingError):
    """Addition/erosion stroke without a valid alignment stroke to attach to."""


class ProjectFormatError(ModelingError):
    """Malformed project document; carries the offending location."""

    def __init__(self, message, location=None):
        super().__init__(f"{message} (at {location})" if location else message)
        self.location = location


class ObjFormatError(ModelingError):
    """Malformed OBJ document; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class DegenerateRingError(ModelingError):
    """Cross-section ring collapsed below the minimum radius."""


class ConstraintIngestError(ModelingError):
    """Annotation stroke cannot be converted to a boundary constraint."""


class ReconstructionError(ModelingError):
    """A part could not be reconstructed."""
