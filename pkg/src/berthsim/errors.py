"""Exception types raised by the simulation engine and its front ends."""


class BerthSimError(Exception):
    """Base class for all berthsim errors."""


class PastTimeError(BerthSimError):
    """An event was scheduled earlier than the current clock."""


class UnknownStateError(BerthSimError):
    """A state variable was read or written without being declared."""


class NonTerminationError(BerthSimError):
    """A run exceeded the configured event ceiling."""


class DeadlockError(BerthSimError):
    """The calendar drained while entities were still waiting for resources.

    Carries ``wait_graph``: a mapping of waiting entity id -> list of
    resource names the entity's pending request needs.
    """

    def __init__(self, message, wait_graph=None):
        super().__init__(message)
        self.wait_graph = wait_graph or {}


class InvalidParamsError(BerthSimError):
    """Distribution parameters violate the distribution's invariants."""


class NegativeDurationError(BerthSimError):
    """A task sampled a negative duration."""


class UnsatisfiableRequestError(BerthSimError):
    """A capture requests more servers than the resource will ever have."""


class ReleaseWithoutHoldError(BerthSimError):
    """An entity released servers it does not hold."""


class AlreadyFullyPreemptedError(BerthSimError):
    """Every server of the resource is already withdrawn."""


class UnbatchOfPlainEntityError(BerthSimError):
    """Unbatch received an entity with no batched contents."""


class BadProbabilitiesError(BerthSimError):
    """Branch probabilities do not form a distribution."""


class PredicateEvalError(BerthSimError):
    """A predicate or formula referenced something undeclared, or is malformed."""


class UnknownValveError(BerthSimError):
    """An activator or gate reference names an undeclared valve."""


class UnknownResourceError(BerthSimError):
    """A reference names an undeclared resource."""


class MissingValveError(BerthSimError):
    """A weather sub-model references a valve the model does not declare."""


class ModelSyntaxError(BerthSimError):
    """Model or scenario text failed to parse; carries diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        super().__init__(str(first) if first else "syntax error")


class ValidationError(BerthSimError):
    """A ModelDef failed static validation; carries diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class CalibrationFailedError(BerthSimError):
    """No parameter setting reached every calibration target within tolerance."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SimRuntimeError(BerthSimError):
    """A run failed; wraps the cause with the replication index when known."""

    def __init__(self, message, replication=None):
        super().__init__(message)
        self.replication = replication
