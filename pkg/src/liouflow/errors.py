"""Exception taxonomy shared by all liouflow modules."""


class LiouflowError(Exception):
    """Base class for all liouflow errors."""


class MalformedExpr(LiouflowError):
    """An expression string or tree contains an unsupported construct."""


class Indeterminate(LiouflowError):
    """An enclosure straddles a decision boundary; re-evaluate at higher precision."""


class PrecisionExhausted(LiouflowError):
    """The precision cap was reached without reaching a decision."""


class ResourceLimit(LiouflowError):
    """A computed object would exceed a configured size cap."""


class StageUnavailable(LiouflowError):
    """A truncation stage beyond the certified stages was requested."""


class DegenerateFrequency(LiouflowError):
    """A resonance denominator k.omega encloses zero where it must not."""


class DivisionByNearZero(LiouflowError):
    """A divisor enclosure meets zero."""


class EmptyWindow(LiouflowError):
    """A certified time window has lower endpoint above its upper endpoint."""


class WitnessFailed(LiouflowError):
    """A certified witness value fell short of its target."""


class PhaseUnreachable(LiouflowError):
    """The requested phase is not attained inside the given interval."""


class TargetUnreachable(LiouflowError):
    """No admissible sub-rectangle reaches the requested target set."""


class DensityFailed(LiouflowError):
    """An epsilon-grid cell has no nearby image point."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class ConfigError(LiouflowError):
    """An experiment configuration is missing or inconsistent."""
