"""Exception types shared across the toolkit."""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for every error raised by rossler_knots."""


class DegenerateParamsError(ToolkitError):
    """Parameter triple makes the second fixed point degenerate (c/a - b = 0)."""


class ConversionMismatchError(ToolkitError):
    """Classical-form conversion failed the pushforward residual check."""


class ClassificationError(ToolkitError):
    """Spectrum is not a saddle focus (all three eigenvalues real)."""


class StepUnderflowError(ToolkitError):
    """Adaptive step size fell below the hard floor (near-singular event)."""


class IntegrationError(ToolkitError):
    """Integration aborted (step budget exhausted or invalid request)."""


class NoCrossingError(ToolkitError):
    """Trajectory produced no section crossing of the requested kind within t_max."""

    def __init__(self, msg: str, reason: str = "no-crossing"):
        super().__init__(msg)
        self.reason = reason


class EscapeError(NoCrossingError):
    """Trajectory left the escape radius before crossing the section."""

    def __init__(self, msg: str):
        super().__init__(msg, reason="escape")


class FixedPointError(NoCrossingError):
    """Trajectory converged to (or entered the capture ball of) a fixed point."""

    def __init__(self, msg: str, reason: str = "fixed-point"):
        super().__init__(msg, reason=reason)


class BranchTypeError(ToolkitError):
    """Requested one-dimensional eigendirection does not exist at that fixed point."""


class SearchError(ToolkitError):
    """Root search failed to converge."""


class NotUnimodalError(ToolkitError):
    """Induced one-dimensional map has no single interior fold."""


class ItineraryError(ToolkitError):
    """Itinerary computation failed part-way; carries the prefix found so far."""

    def __init__(self, msg: str, prefix: str):
        super().__init__(msg)
        self.prefix = prefix


class OrbitSolveError(ToolkitError):
    """Multiple-shooting Newton did not converge for the requested word."""


class ZeroDisplacementError(ToolkitError):
    """Fixed point sits on (or too close to) the index loop."""


class RefinementLimitError(ToolkitError):
    """Index loop refinement hit its subdivision budget."""


class GenericityError(ToolkitError):
    """No generic projection direction found (degenerate curve)."""


class DiagramError(ToolkitError):
    """Invalid or disconnected crossing diagram."""


class NotCoprimeError(ToolkitError):
    """Torus-knot indices must be coprime and >= 2."""


class WordError(ToolkitError):
    """Symbol word is empty, non-binary, or not of minimal period."""


class ClosureError(ToolkitError):
    """Sphere closure arc could not avoid the curve; retry with larger radius."""


class ConfigError(ToolkitError):
    """Bad run configuration (unknown key, malformed value, missing input)."""
