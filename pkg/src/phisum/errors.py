"""Exception hierarchy shared by all modules."""


class PhisumError(Exception):
    """Base class for library errors."""


class ParseError(PhisumError):
    """Malformed automaton text or weight literal."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ValidationError(PhisumError):
    """The automaton violates a structural requirement."""


class CycleError(ValidationError):
    """The graph formed by ordinary and failure arcs contains a cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle through states " + " -> ".join(map(str, self.cycle)))


class DuplicateFailureArc(ValidationError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"state {state!r} has more than one failure arc")


class CapabilityError(PhisumError):
    """An operation needs an algebraic capability the semiring lacks."""


class UnderflowError(PhisumError):
    """undo() asked to revert more updates than were recorded."""


class PathBudgetExceeded(PhisumError):
    """Brute-force enumeration would visit more paths than allowed."""
