"""Exception types shared across the package."""


class WeedPlanError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(WeedPlanError, ValueError):
    """A numeric parameter is out of range or non-finite."""


class FieldFormatError(WeedPlanError, ValueError):
    """A field CSV file is malformed; message names the offending line."""


class FieldBoundsError(WeedPlanError, ValueError):
    """A plant lies outside the lane described by the field header."""


class InsufficientDataError(WeedPlanError, ValueError):
    """Not enough samples to run a statistical test at the requested resolution."""


class PastTargetError(WeedPlanError, ValueError):
    """The target already crossed the tool line; no arrival time exists."""


class PlannerSizeError(WeedPlanError, ValueError):
    """Instance exceeds the planner's size cap."""


class ConfigError(WeedPlanError, ValueError):
    """A simulation or sweep configuration violates an invariant."""
