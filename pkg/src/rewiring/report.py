"""Verification report records shared by the verifiers and the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

TOLERANCE = 1e-12


@dataclass
class CheckReport:
    """Outcome of one property check.

    ``max_violation`` is the largest absolute discrepancy observed; ``worst``
    describes where it happened.
    """

    property: str
    params: dict[str, Any] = field(default_factory=dict)
    max_violation: float = 0.0
    tolerance: float = TOLERANCE
    passed: bool = True
    worst: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        params = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"[{flag}] {self.property} ({params}) max_violation={self.max_violation:.3g} tol={self.tolerance:g}"


def finish(report: CheckReport) -> CheckReport:
    report.max_violation = float(report.max_violation)
    report.passed = report.max_violation < report.tolerance
    return report


@dataclass
class VerifyReport:
    suite: str
    cases: list[CheckReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "cases": [asdict(c) for c in self.cases],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)
