"""Validation reports and verdicts shared by every checker."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Verdict(str, Enum):
    """Three-valued answer for semidecidable questions."""

    EQUAL = "equal"
    NOT_EQUAL = "not_equal"
    UNKNOWN = "unknown"


class Inclusion(str, Enum):
    SUBSET = "subset"
    DISJOINT = "disjoint"
    UNKNOWN = "unknown"


@dataclass
class Check:
    """Outcome of one named check.

    `passed` is None when the check was skipped or could not be decided.
    """

    name: str
    passed: bool | None
    depth: int | None = None
    exhaustive: bool = True
    detail: str = ""
    payload: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "depth": self.depth,
            "exhaustive": self.exhaustive,
            "detail": self.detail,
            "payload": self.payload,
        }


@dataclass
class ValidationReport:
    """An ordered list of checks about one subject."""

    subject: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed is not False for check in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [check for check in self.checks if check.passed is False]

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: ValidationReport) -> None:
        self.checks.extend(other.checks)

    def check(self, name: str) -> Check:
        """Look up a check by name.

        Raises:
            KeyError: If no check has that name
        """
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(f"No check named {name!r} in report for {self.subject}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
        }
