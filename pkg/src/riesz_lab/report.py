"""Audit report record shared by all audits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return int(x)
    try:
        v = float(x)
    except (TypeError, ValueError):
        return str(x)
    if math.isfinite(v):
        return v
    return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")


@dataclass
class AuditReport:
    """Outcome of one audit; ``passed`` holds exactly when margin >= -tolerance."""

    audit_name: str
    parameters: dict
    observed: dict
    bound_name: str
    bound: float
    margin: float
    tolerance: float
    runtime_ms: int = 0
    passed: bool = field(init=False)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.passed = bool(math.isfinite(self.margin) and self.margin >= -self.tolerance)

    @classmethod
    def from_worst(cls, audit_name, parameters, observed, bound_name, bound, worst, tolerance, **kw):
        margin = float(bound) - float(worst) if math.isfinite(worst) else -math.inf
        return cls(audit_name, parameters, observed, bound_name, float(bound), margin, float(tolerance), **kw)

    def fail(self, reason: str) -> "AuditReport":
        self.flags.append(reason)
        self.passed = False
        return self

    def to_dict(self) -> dict:
        return _jsonable({
            "audit_name": self.audit_name,
            "parameters": self.parameters,
            "observed": self.observed,
            "bound": {"name": self.bound_name, "value": self.bound},
            "margin": self.margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "flags": list(self.flags),
            "runtime_ms": int(self.runtime_ms),
        })
