from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

__all__ = ["VerificationReport"]


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return _jsonable(value.item())
    return value


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one verification check."""

    check: str
    passed: bool
    max_gap: float
    tolerance: float
    grid_n: int | None = None
    details: list[dict[str, Any]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict[str, Any]:
        return _jsonable(
            {
                "check": self.check,
                "pass": bool(self.passed),
                "max_gap": float(self.max_gap),
                "tolerance": float(self.tolerance),
                "grid_n": self.grid_n,
                "details": self.details,
            }
        )

    def dumps(self, **kwargs: Any) -> str:
        return json.dumps(self.to_json(), **kwargs)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.check}: max_gap={self.max_gap:.3e} (tol {self.tolerance:.1e})"
