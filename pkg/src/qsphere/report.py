"""Structured results of verification checks."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction


def _fmt(x):
    if hasattr(x, "item") and not isinstance(x, (dict, list, tuple)):
        x = x.item()  # numpy scalars
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.17g}")
    if isinstance(x, dict):
        return {str(k): _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


@dataclass
class CheckReport:
    """Outcome of one check: exact pass/fail or a maximal residual against a tolerance."""

    name: str
    passed: bool
    params: dict = field(default_factory=dict)
    residual: float | None = None
    tol: float | None = None
    basis_size: int | None = None
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def to_json(self, timing: bool = False) -> dict:
        d = {
            "name": self.name,
            "passed": bool(self.passed),
            "params": _fmt(self.params),
            "residual": _fmt(self.residual),
            "tol": _fmt(self.tol),
            "basis_size": self.basis_size,
            "details": _fmt(self.details if timing else
                            {k: v for k, v in self.details.items() if k != "elapsed"}),
        }
        if timing:
            d["elapsed"] = _fmt(self.elapsed)
        return d

    def line(self) -> str:
        res = "exact" if self.residual is None else f"{self.residual:.3e}"
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  [{res}]"


def residual_report(name: str, residual: float, tol: float, **kw) -> CheckReport:
    ok = bool(residual <= tol) and not math.isnan(residual)
    return CheckReport(name, ok, residual=float(residual), tol=tol, **kw)


def dumps(reports, **kw) -> str:
    return json.dumps([r.to_json(**kw) for r in reports], indent=2, sort_keys=True)
