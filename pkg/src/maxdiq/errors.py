"""Exception and warning types shared across the package."""


class MaxdiqError(Exception):
    """Base class for all errors raised by maxdiq."""


class ParameterError(MaxdiqError, ValueError):
    """Model or request parameters violate their invariants."""


class RangeError(MaxdiqError, ValueError):
    """A tabulated quantity was evaluated outside its sample range."""


class SingularityError(MaxdiqError, ZeroDivisionError):
    """Evaluation at a point where the quantity is singular."""


class PoleError(SingularityError):
    """Laplace image evaluated at one of its poles."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class PassivityError(MaxdiqError):
    """A computed squared coupling came out negative beyond tolerance."""


class UnphysicalDispersionError(MaxdiqError, ValueError):
    """The dispersion relation is not strictly increasing where needed."""


class LosslessCouplingError(MaxdiqError):
    """The coupling of a lossless resonance is a delta weight, not a function."""


class NumericalError(MaxdiqError, ArithmeticError):
    """Root finding or quadrature failed to converge."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ContourRefusedError(MaxdiqError):
    """Numerical contour inversion refused for an image with imaginary-axis poles."""


class DivergenceError(MaxdiqError, ArithmeticError):
    """The image does not decay along the inversion contour."""


class UnsupportedConfigurationError(MaxdiqError):
    """The requested combination of medium, kernel and method is not supported."""


class ResonanceError(MaxdiqError):
    """Bath frequency sits on a longitudinal resonance of the medium."""

    def __init__(self, message, frequency=None):
        super().__init__(message)
        self.frequency = frequency


class ResolutionError(MaxdiqError, ValueError):
    """Time grid too coarse for the requested check."""


class InconclusiveError(MaxdiqError):
    """A fit had too little data to decide."""


class ConsistencyError(MaxdiqError):
    """Two quantities that must agree by construction do not."""


class AccuracyWarning(UserWarning):
    """A truncation or tail estimate exceeds the requested tolerance."""


class ExtrapolationWarning(UserWarning):
    """A tabulated model was evaluated beyond its samples (returned zero)."""
