"""Exception hierarchy.

Every error raised by the library derives from :class:`BvarError`. The
intermediate classes map onto pipeline stages so the CLI can turn them into
distinct exit codes.
"""


class BvarError(Exception):
    """Base class for all library errors."""


# -- ingestion -------------------------------------------------------------

class PanelError(BvarError, ValueError):
    """Input data does not form a valid panel."""


class MissingValueError(PanelError):
    def __init__(self, row, column):
        self.row = row
        self.column = column
        super().__init__(f"missing value at row {row}, column {column!r}")


class RaggedRowError(PanelError):
    def __init__(self, row, expected, found):
        self.row = row
        super().__init__(f"row {row} has {found} cells, expected {expected}")


class NonNumericError(PanelError):
    def __init__(self, row, column, cell):
        self.row = row
        self.column = column
        super().__init__(f"non-numeric value {cell!r} at row {row}, column {column!r}")


class DuplicateNameError(PanelError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"duplicate variable name {name!r}")


class TimeOrderError(PanelError):
    def __init__(self, row, previous, current):
        self.row = row
        super().__init__(
            f"period labels must be strictly increasing: {current!r} at row {row} "
            f"does not follow {previous!r}")


class ShortPanelError(PanelError):
    pass


class ZeroRangeError(PanelError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name!r} is constant; min-max scaling is undefined")


# -- estimation ------------------------------------------------------------

class EstimationError(BvarError):
    """Model could not be estimated."""


class LagOrderError(EstimationError, ValueError):
    pass


class InsufficientSampleError(EstimationError):
    pass


class SingularDesignError(EstimationError):
    pass


class DegenerateCovarianceError(EstimationError):
    pass


class DegenerateScaleError(EstimationError):
    pass


class DegreesOfFreedomError(EstimationError):
    pass


class DefinitenessError(EstimationError):
    pass


# -- diagnostics -----------------------------------------------------------

class DiagnosticError(BvarError):
    """Post-estimation diagnostics failed."""


class CriterionDomainError(DiagnosticError, ValueError):
    pass


class NumericalFailureError(DiagnosticError):
    pass


# -- configuration ---------------------------------------------------------

class ConfigError(BvarError, ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
