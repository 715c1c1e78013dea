"""
Errors

Exception hierarchy shared by every trailrecover module, plus the
process exit codes the command line maps them to.
"""

from __future__ import annotations
from typing import Iterable, List, Optional

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_BUDGET_EXCEEDED = 3
EXIT_INTERNAL = 4


class TrailRecoverError(Exception):
    """Base class for all trailrecover errors."""

    exit_code = EXIT_INTERNAL


class InvalidInputError(TrailRecoverError, ValueError):
    """Input data or arguments violate a documented precondition."""

    exit_code = EXIT_INVALID_INPUT


class IngestError(InvalidInputError):
    """A trail CSV file could not be ingested."""

    def __init__(self, message: str, line: Optional[int] = None, path: str = ""):
        self.line = line
        self.path = path
        where = path or "<input>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class InvalidTrailError(InvalidInputError):
    """A trail violates the Trail invariants."""


class EmptyInputError(InvalidInputError):
    """An operation received no data to work on."""


class UnknownLocationError(InvalidInputError, KeyError):
    """A location token is not part of the transition network."""

    def __init__(self, location: str):
        self.location = location
        super().__init__(f"Unknown location: {location!r}")

    def __str__(self) -> str:
        return self.args[0]


class ConfigError(InvalidInputError):
    """A configuration value is out of range or malformed."""


class KeyMismatchError(InvalidInputError):
    """Answer keys and recoveries do not describe the same runs."""

    def __init__(self, missing: Iterable[str], extra: Iterable[str] = ()):
        self.missing: List[str] = sorted(missing)
        self.extra: List[str] = sorted(extra)
        parts = []
        if self.missing:
            parts.append(f"missing recoveries for {', '.join(self.missing)}")
        if self.extra:
            parts.append(f"no answer for {', '.join(self.extra)}")
        super().__init__("Key mismatch: " + "; ".join(parts))


class BudgetExceeded(TrailRecoverError):
    """The exact solver would need more enumerations than allowed."""

    exit_code = EXIT_BUDGET_EXCEEDED

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"Instance needs {required} enumerations, budget is {budget}"
        )


class PhaseError(TrailRecoverError):
    """A pipeline phase failed. Wraps the original error."""

    def __init__(self, phase: str, cause: BaseException):
        self.phase = phase
        self.cause = cause
        if isinstance(cause, OSError):
            self.exit_code = EXIT_INVALID_INPUT
        else:
            self.exit_code = getattr(cause, "exit_code", EXIT_INTERNAL)
        super().__init__(f"[{phase}] {cause}")
