"""Exception hierarchy shared by the library and the command line.

Every exception carries the process exit code the CLI reports for it.
"""

from __future__ import annotations


class ArgTraceError(Exception):
    exit_code = 1


class InputError(ArgTraceError):
    """Unreadable or malformed input (files, queries)."""

    exit_code = 1


class ValidationError(ArgTraceError):
    exit_code = 2


class CycleFound(ValidationError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("attack cycle: " + " -> ".join(self.cycle))


class UnknownArgument(ValidationError):
    def __init__(self, name, where=""):
        self.name = name
        msg = f"unknown argument {name!r}"
        super().__init__(f"{msg} ({where})" if where else msg)


class DuplicateArgument(ValidationError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"duplicate argument {name!r}")


class InvalidArgumentId(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class UnknownFluent(ValidationError):
    pass


class InvalidContext(ValidationError):
    pass


class PreconditionViolated(ValidationError):
    def __init__(self, action, t):
        self.action = action
        self.t = t
        super().__init__(f"precondition of {action} fails at t={t}")


class NotFinal(ValidationError):
    pass


class TargetNotTrue(ValidationError):
    pass


class TargetNotInTrace(ValidationError):
    pass


class WindowOutOfRange(ValidationError):
    pass


class InvariantViolation(ArgTraceError):
    """The engine broke one of its own guarantees; always a bug."""

    exit_code = 3


class ConflictingEffects(InvariantViolation):
    def __init__(self, fluent, events):
        self.fluent = fluent
        self.events = sorted(events)
        names = ", ".join(str(e) for e in self.events)
        super().__init__(f"contradictory effects on {fluent}: {names}")


class HorizonExceeded(InvariantViolation):
    pass


class SolverError(ArgTraceError):
    exit_code = 4


class SolverUnavailable(SolverError):
    pass


class SolverParseError(SolverError):
    pass


class SolverDisagreement(SolverError):
    def __init__(self, diff):
        self.diff = list(diff)
        super().__init__("solver disagrees with engine:\n" + "\n".join(self.diff))
