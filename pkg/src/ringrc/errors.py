"""Exception types raised by the simulator."""


class RingRCError(Exception):
    """Base class for all simulator errors."""


class ConfigError(RingRCError, ValueError):
    """Invalid or inconsistent configuration."""


class ConfigMismatch(ConfigError):
    """Timing grids (dt, chip, delay) do not align."""


class BiasTooSmall(ConfigError):
    """Encoded optical power would be non-positive."""


class NonFinite(RingRCError, ArithmeticError):
    """The integrated state left the finite range."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class Diverged(RingRCError, ArithmeticError):
    """NARMA-10 target series blew up for this input draw."""


class OutOfRange(RingRCError, IndexError):
    pass


class SingularSystem(RingRCError, ArithmeticError):
    """Normal equations could not be factorized; raise the ridge parameter."""


class ShapeMismatch(RingRCError, ValueError):
    pass


class ConstantTarget(RingRCError, ValueError):
    """NMSE is undefined for a target with zero variance."""
