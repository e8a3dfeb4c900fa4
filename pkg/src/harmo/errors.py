"""Exception hierarchy shared by all harmo modules."""


class HarmoError(Exception):
    """Base class for all errors raised by this package."""


class StencilWidthError(HarmoError):
    """Grid too small for the finite-difference stencil."""


class OutOfDomainError(HarmoError):
    """A query point lies outside the grid hull."""

    def __init__(self, point, message=None):
        self.point = point
        super().__init__(message or f"point outside grid hull: {point}")


class InvalidVolumeElementError(HarmoError):
    """Integration weight is not strictly positive."""


class InvalidSampleError(HarmoError):
    """A weighted sample contains non-finite or malformed data."""


class UnsupportedDimensionError(HarmoError):
    """Operation not defined in this dimension."""


class EllipticityError(HarmoError):
    """Metric violates its two-sided ellipticity bound (or is not SPD)."""


class SymmetryError(HarmoError):
    """Declared tensor symmetry does not hold."""


class CompatibilityError(HarmoError):
    """Right-hand side of a pure-Neumann system fails the compatibility test."""

    def __init__(self, defect, message=None):
        self.defect = defect
        super().__init__(message or f"Neumann compatibility defect {defect:.3e} above tolerance")


class NonConvergenceError(HarmoError):
    """Iterative solver exceeded its iteration budget."""

    def __init__(self, residuals, message=None):
        self.residuals = residuals
        last = residuals[-1] if len(residuals) else float("nan")
        super().__init__(message or f"solver did not converge (last residual {last:.3e})")


class ImmersionFailureError(HarmoError):
    """Jacobian of a coordinate map degenerates at some node."""


class DegenerateImmersionError(HarmoError):
    """dPhi is rank-deficient at some node."""

    def __init__(self, node, message=None):
        self.node = node
        super().__init__(message or f"immersion rank-deficient at node {node}")


class InversionError(HarmoError):
    """Newton inversion of a coordinate map failed."""

    def __init__(self, best_iterate, residual, message=None):
        self.best_iterate = best_iterate
        self.residual = residual
        super().__init__(message or f"map inversion diverged (best residual {residual:.3e})")


class PullbackDegeneracyError(HarmoError):
    """Pulled-back metric failed the SPD check."""


class CertificationError(HarmoError):
    """Harmonic-coordinate certificate above tolerance."""

    def __init__(self, defect, tolerance, defect_field=None):
        self.defect = defect
        self.tolerance = tolerance
        self.defect_field = defect_field
        super().__init__(f"harmonic defect {defect:.3e} above certificate tolerance {tolerance:.3e}")


class AdmissionError(HarmoError):
    """Curvature norm above the pipeline admission threshold."""

    def __init__(self, value, threshold):
        self.value = value
        self.threshold = threshold
        super().__init__(f"curvature norm {value:.3e} above admission threshold {threshold:.3e}")


class HypothesisError(HarmoError):
    """Boundary-data smallness hypotheses violated."""

    def __init__(self, failed, ledger=None):
        self.failed = list(failed)
        self.ledger = ledger
        super().__init__("hypothesis check failed: " + ", ".join(self.failed))


class ExtensionDegeneracyError(HarmoError):
    """Glued metric lost positivity on the blending annulus."""


class GenerationError(HarmoError):
    """Generator parameters out of documented range."""


class ConfigurationError(HarmoError):
    """Invalid run configuration."""


class PipelineStageError(HarmoError):
    """A pipeline stage aborted; carries the stage tag and the original error."""

    def __init__(self, stage, original):
        self.stage = stage
        self.original = original
        super().__init__(f"pipeline stage '{stage}' failed: {original}")
