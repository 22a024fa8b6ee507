"""Pass/fail records shared by every check in the package."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["CheckResult", "Report"]


@dataclass
class CheckResult:
    name: str
    region: str
    passed: bool
    checked: int = 0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"[{status}] {self.name}  ({self.region}; {self.checked} checked)"
        return out + (f"  {self.detail}" if self.detail else "")

    def as_dict(self) -> dict:
        return {"name": self.name, "region": self.region, "passed": self.passed,
                "checked": self.checked, "detail": self.detail}


@dataclass
class Report:
    title: str
    results: list[CheckResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, result: CheckResult) -> CheckResult:
        self.results.append(result)
        return result

    def extend(self, other: "Report") -> None:
        self.results.extend(other.results)
        self.notes.extend(other.notes)

    def to_text(self) -> str:
        lines = [f"== {self.title}"]
        lines += [f"note: {n}" for n in self.notes]
        lines += [r.line() for r in self.results]
        n_ok = sum(r.passed for r in self.results)
        lines.append(f"{n_ok}/{len(self.results)} passed")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"title": self.title, "passed": self.passed, "notes": self.notes,
                           "results": [r.as_dict() for r in self.results]}, indent=2)
