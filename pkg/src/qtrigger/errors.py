"""Exception hierarchy shared by all qtrigger modules."""


class QTriggerError(Exception):
    """Base class for every error raised by this package."""


class NumericError(QTriggerError):
    """A numerical procedure could not produce a trustworthy answer."""


class InvariantViolation(QTriggerError):
    """A machine-checked model invariant failed at runtime."""


# potentials
class DomainError(QTriggerError, ValueError):
    pass


class NoBarrier(NumericError):
    pass


class AmbiguousBarrier(NumericError):
    pass


# spectra
class InsufficientBox(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


class AmbiguousLabel(NumericError):
    pass


class NotADoubletWarning(UserWarning):
    pass


# soliton
class UnresolvedKink(NumericError):
    pass


class StabilityError(NumericError):
    pass


class BlowupError(NumericError):
    pass


class NoKink(NumericError):
    pass


class MultiKink(NumericError):
    pass


class InsufficientTravel(NumericError):
    pass


class NeverArrives(NumericError):
    pass


# snare cycle
class IllegalTransition(InvariantViolation):
    def __init__(self, state, event, index=None):
        self.state = state
        self.event = event
        self.index = index
        where = "" if index is None else f" at trace index {index}"
        super().__init__(f"event {event} not legal in phase {state.phase.name}{where}")


# bouton
class Unreachable(NumericError):
    pass


# configuration
class ConfigError(QTriggerError):
    """One or more problems in an experiment config; ``errors`` lists them all."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))


class ParseError(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class UnitError(ConfigError, ValueError):
    pass
