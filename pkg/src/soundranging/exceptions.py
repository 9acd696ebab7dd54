"""Exception hierarchy for the sound-ranging package."""


class SoundRangingError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SoundRangingError, ValueError):
    """Malformed argument: wrong dimension, non-finite entry, bad parameter."""


class InvalidInstanceError(InvalidInputError):
    """The sensors/times do not form a valid sound-ranging instance."""


class DegenerateBasisError(SoundRangingError, ValueError):
    pass


class DegenerateLayoutError(SoundRangingError, ValueError):
    pass


class CapacityError(SoundRangingError):
    """A requested enumeration would exceed its configured size cap."""


class EmptyCoverError(SoundRangingError, RuntimeError):
    """Every ball of a cover level was pruned.

    For an exact instance this cannot happen, so it means the source is
    outside the initial ball, the times are inconsistent, or the prune
    slack is too small for the floating-point noise of the instance.
    """


class NumericalError(SoundRangingError, ArithmeticError):
    pass
