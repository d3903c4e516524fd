"""Exception hierarchy shared across the package."""

from __future__ import annotations

from typing import Any


class FECError(Exception):
    """Base class for all package errors."""


class BackendError(FECError):
    """A backend was unreachable, failed, or returned empty text.

    ``stage`` names the pipeline stage (``qg``, ``qa``, ``qa2claim``,
    ``entailment``); ``provenance`` is a JSON-friendly description of the
    candidate being processed when the failure happened, if any.
    """

    def __init__(self, message: str, stage: str | None = None, provenance: Any = None):
        super().__init__(message)
        self.stage = stage
        self.provenance = provenance

    def with_context(self, stage: str | None = None, provenance: Any = None) -> "BackendError":
        if stage is not None and self.stage is None:
            self.stage = stage
        if provenance is not None and self.provenance is None:
            self.provenance = provenance
        return self

    def to_record(self) -> dict[str, Any]:
        return {
            "type": type(self).__name__,
            "stage": self.stage,
            "message": str(self),
            "provenance": self.provenance,
        }


class ProtocolError(BackendError):
    """A backend answered, but the response violates the wire contract."""


class TemplateError(FECError):
    """Prompt template is missing a required placeholder."""


class AnnotatorUnavailable(FECError):
    """The requested linguistic toolkit is not installed."""


class UnparseableQuestion(FECError):
    """No auxiliary/subject split could be found in a boolean question."""


class MissingInputClaim(FECError):
    """Candidate list handed to selection lacks the input-claim sentinel."""


class DegenerateInput(FECError):
    """A statistic is undefined for the given input (e.g. constant vector)."""


class InsufficientData(FECError):
    """Too few pairable ratings to compute agreement."""


class LengthMismatch(FECError):
    """Aligned sequences have different lengths."""


class DatasetError(FECError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(DatasetError):
    def __init__(self, line: int, reason: str):
        super().__init__(line, reason)
        self.reason = reason


class InvariantViolation(DatasetError):
    def __init__(self, line: int, field: str, detail: str = ""):
        super().__init__(line, f"invalid field {field!r}" + (f": {detail}" if detail else ""))
        self.field = field
