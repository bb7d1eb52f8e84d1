"""Small result records shared by the verifiers and the harness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CheckReport:
    """Outcome of one verification over a set of sample points."""

    name: str
    passed: bool
    max_residual: float
    tol: float
    worst_point: list | None = None
    error: str | None = None
    details: dict = field(default_factory=dict)
    kind: str = "residual"

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "pass": bool(self.passed),
            "max_residual": _clean(self.max_residual),
            "tol": _clean(self.tol),
            "worst_point": None if self.worst_point is None else [_clean(v) for v in self.worst_point],
            "kind": self.kind,
        }
        if self.error is not None:
            out["error"] = self.error
        if self.details:
            out["details"] = {k: _clean_tree(v) for k, v in sorted(self.details.items())}
        return out


def residual_report(name, residuals, points, tol, **details) -> CheckReport:
    """Build a report from per-point residuals; ``points`` rows label the residuals."""
    residuals = np.asarray(residuals, dtype=float).ravel()
    points = np.asarray(points, dtype=float)
    if residuals.size == 0:
        return CheckReport(name, True, 0.0, tol, None, details=details)
    k = int(np.argmax(np.where(np.isfinite(residuals), residuals, np.inf)))
    worst = residuals[k]
    passed = bool(np.all(np.isfinite(residuals)) and np.all(residuals <= tol))
    return CheckReport(name, passed, float(worst), float(tol),
                       [float(v) for v in np.atleast_1d(points[k])], details=details)


def _clean(v):
    if v is None:
        return None
    v = float(v)
    if not np.isfinite(v):
        return repr(v)
    return v


def _clean_tree(v):
    if isinstance(v, dict):
        return {str(k): _clean_tree(x) for k, x in sorted(v.items())}
    if isinstance(v, (list, tuple)):
        return [_clean_tree(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean_tree(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _clean(v)
    return v
