"""Error hierarchy shared by the engine, storage, service and CLI layers.

Every error carries a stable ``code`` string; the HTTP layer maps codes to
status codes and the CLI maps them to exit codes.
"""

from __future__ import annotations


class PmControlsError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


class ValidationFailed(PmControlsError):
    """Input document or value violates the schema or an invariant.

    ``pointer`` locates the offending field, e.g. ``tasks[2].curve[0].t``.
    """

    code = "validation_failed"

    def __init__(self, message: str, pointer: str | None = None):
        if pointer:
            message = f"{pointer}: {message}"
        super().__init__(message)
        self.pointer = pointer


class UnknownTask(PmControlsError):
    """A progress entry references a task that is not in the baseline."""

    code = "unknown_task"


class UndefinedIndex(PmControlsError):
    """A performance index has a zero denominator (no spend / no plan yet)."""

    code = "undefined_index"


class MissingEstimate(PmControlsError):
    """The fresh-estimate forecast was requested without a remaining-cost figure."""

    code = "missing_estimate"


class NoDefinedIndex(PmControlsError):
    """No snapshot in the history has a defined cost index."""

    code = "no_defined_index"


class IllegalTransition(PmControlsError):
    """The event is not legal in the project's current phase."""

    code = "illegal_transition"

    def __init__(self, phase, event_kind, detail: str = ""):
        msg = f"event {getattr(event_kind, 'value', event_kind)!r} not allowed in phase {getattr(phase, 'value', phase)!r}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
        self.phase = phase
        self.event_kind = event_kind


class TerminalState(PmControlsError):
    """The project is in a terminal phase; no further events are accepted."""

    code = "terminal_state"


class PhaseViolation(PmControlsError):
    """A write is not permitted in the project's current phase or state."""

    code = "phase_violation"


class ConflictingRevision(PmControlsError):
    """Optimistic-concurrency check failed: the write was based on a stale revision."""

    code = "conflicting_revision"


class NoBaseline(PmControlsError):
    """The project has no baseline yet."""

    code = "no_baseline"


class NoSnapshot(PmControlsError):
    """The project has no usable progress snapshot."""

    code = "no_snapshot"


class UnknownProject(PmControlsError):
    code = "unknown_project"


class AlreadyExists(PmControlsError):
    code = "already_exists"


class Unauthorized(PmControlsError):
    """The acting role is not permitted to submit this event."""

    code = "unauthorized"


class MethodNotAllowed(PmControlsError):
    """The entity is immutable; the requested mutation is never permitted."""

    code = "method_not_allowed"


class ConfigInvalid(PmControlsError):
    code = "config_invalid"
