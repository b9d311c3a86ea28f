"""Exception hierarchy shared by every layer.

The CLI maps the three branches to exit codes: validation 1, numerical 2, format 3.
"""

from __future__ import annotations


class MdwmError(Exception):
    """Root of all errors raised by this package."""


# --- validation (bad inputs or configuration) ---


class ValidationError(MdwmError):
    """Inputs or configuration violate a documented precondition."""


class DimensionMismatchError(ValidationError):
    pass


class LabelSetMismatchError(ValidationError):
    pass


class DatasetValidationError(ValidationError):
    pass


class FeatureConfigMismatchError(ValidationError):
    """Target and source features were produced by different feature configurations."""


class InfeasibleSplitError(ValidationError):
    pass


class MissingCellError(ValidationError):
    """A (method, n, lambda) cell requested by the meta-analysis is absent from a table."""


# --- numerical ---


class NumericalError(MdwmError):
    """A computation could not produce a valid result."""


class NotSpdError(NumericalError):
    pass


class IllConditionedError(NotSpdError):
    pass


class RegularizationNeededError(NumericalError):
    """A covariance estimate is singular; raise the shrinkage intensity."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, *, gradient_norm: float, iterations: int):
        super().__init__(f"{message} (gradient norm {gradient_norm:.3e} after {iterations} iterations)")
        self.gradient_norm = gradient_norm
        self.iterations = iterations


class UndefinedTestError(NumericalError):
    pass


class ZeroVarianceError(NumericalError):
    pass


# --- on-disk formats ---


class DatasetFormatError(MdwmError):
    """A file on disk does not follow the documented format."""


class MalformedHeaderError(DatasetFormatError):
    pass


class UnknownFormatVersionError(DatasetFormatError):
    pass


class DimensionInconsistencyError(DatasetFormatError):
    pass
