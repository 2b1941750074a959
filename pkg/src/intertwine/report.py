"""Verification reports: named defects with tolerances."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.defect) and self.defect <= self.tol

    def to_dict(self):
        return {
            "name": self.name,
            "anchor": self.anchor,
            "defect": float(self.defect),
            "tol": float(self.tol),
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, name, anchor, defect, tol):
        self.checks.append(Check(name, anchor, float(defect), float(tol)))
        return self

    def extend(self, other: "VerificationReport", prefix: str = ""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.anchor, c.defect, c.tol))
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {"checks": [c.to_dict() for c in self.checks], "pass": self.passed}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)
