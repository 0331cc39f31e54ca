"""Exception types shared across the package.

Every anticipated failure raises a subclass of :class:`ThingTwinError` with a
stable ``code`` string, so callers (CLI, HTTP service, tests) can map errors
without parsing messages.
"""

from __future__ import annotations


class ThingTwinError(Exception):
    """Base class for all anticipated failures."""

    code = "Error"

    def __init__(self, message: str, *, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.path = path

    def __str__(self) -> str:
        if self.path:
            return f"{self.code} at {self.path}: {self.message}"
        return f"{self.code}: {self.message}"


# --- Thing Description / model language -----------------------------------

class TdError(ThingTwinError):
    """Malformed Thing Description document."""

    code = "TdError"

    def __init__(self, code: str, message: str, *, path: str | None = None):
        super().__init__(message, path=path)
        self.code = code


class ModelSyntaxError(ThingTwinError):
    """Model string rejected by the lexer or parser."""

    code = "Syntax"

    def __init__(self, message: str, *, position: int, code: str = "Syntax"):
        super().__init__(f"{message} (at column {position})")
        self.position = position
        self.code = code


class ResolutionError(ThingTwinError):
    """Model references cannot be resolved against the Thing Description."""

    code = "ResolutionError"

    def __init__(self, code: str, message: str, *, path: str | None = None):
        super().__init__(message, path=path)
        self.code = code


# --- dynamics ---------------------------------------------------------------

class DynamicsError(ThingTwinError):
    code = "DynamicsError"


class UnknownChannelError(DynamicsError):
    code = "UnknownChannel"


class UnknownOutputError(DynamicsError):
    code = "UnknownOutput"


class NumericDomainError(DynamicsError):
    """Evaluation hit a math domain error (division by zero, round(inf), ...)."""

    code = "NumericDomain"

    def __init__(self, message: str, *, t: float):
        super().__init__(f"{message} at t={t!r}")
        self.t = t


class StepSizeUnderflowError(DynamicsError):
    """Adaptive step control shrank below representable resolution."""

    code = "StepSizeUnderflow"

    def __init__(self, message: str, *, t: float):
        super().__init__(f"{message} at t={t!r}")
        self.t = t


# --- learning ---------------------------------------------------------------

class LearningError(ThingTwinError):
    code = "LearningError"


class BoundsViolationError(LearningError):
    code = "BoundsViolation"


class NoProgressError(LearningError):
    """First trust-region iteration stalled with a non-trivial gradient."""

    code = "NoProgress"

    def __init__(self, message: str, *, gradient_norm: float):
        super().__init__(f"{message} (scaled gradient norm {gradient_norm:.3e})")
        self.gradient_norm = gradient_norm


class ContinuousFitError(LearningError):
    """A round of a warm-started fit chain failed; partial results attached."""

    code = "ContinuousFitFailed"

    def __init__(self, message: str, *, round_index: int, partial, cause: Exception):
        super().__init__(message)
        self.round_index = round_index
        self.partial = partial
        self.cause = cause


# --- twin -------------------------------------------------------------------

class TwinError(ThingTwinError):
    code = "TwinError"


class UnknownPropertyError(TwinError):
    code = "UnknownProperty"


class ReadOnlyPropertyError(TwinError):
    code = "ReadOnlyProperty"


class TimeBeforeAnchorError(TwinError):
    code = "TimeBeforeAnchor"


class TimeInPastError(TwinError):
    code = "TimeInPast"


class UnknownStateNameError(TwinError):
    code = "UnknownStateName"


class InsufficientCoverageError(TwinError):
    code = "InsufficientCoverage"


# --- traces / persistence ---------------------------------------------------

class TraceError(ThingTwinError):
    code = "TraceError"

    def __init__(self, code: str, message: str, *, path: str | None = None):
        super().__init__(message, path=path)
        self.code = code


class ProjectError(ThingTwinError):
    code = "ProjectError"

    def __init__(self, code: str, message: str, *, path: str | None = None):
        super().__init__(message, path=path)
        self.code = code
