"""Finite-difference oracles used to cross-check exact derivatives."""

from __future__ import annotations

import numpy as np

from ..fields import NDIM, Expr, MatrixField, as_points, evaluate_fields
from ..report import residual_report

FD_REL_STEP = 1e-5


def fd_step(x, direction: int) -> float:
    return FD_REL_STEP * max(1.0, abs(float(x[direction])))


def fd_oracle(field, x, direction: int):
    """Central difference ``(f(x + h e) - f(x - h e)) / 2h`` with ``h = 1e-5 max(1, |x_a|)``.

    ``field`` may be an Expr, a MatrixField or any callable of one point.
    """
    x = np.asarray(x, dtype=float)
    h = fd_step(x, direction)
    step = np.zeros(NDIM)
    step[direction] = h
    return (field(x + step) - field(x - step)) / (2.0 * h)


def fd_gradient_batch(fields, pts) -> list:
    """Central differences of several fields in every direction at many points.

    Returns a list (per field) of arrays shaped ``(4, N, *shape)``.
    """
    pts, _ = as_points(pts)
    out = [[] for _ in fields]
    for a in range(NDIM):
        h = FD_REL_STEP * np.maximum(1.0, np.abs(pts[:, a]))
        shift = np.zeros_like(pts)
        shift[:, a] = h
        plus = evaluate_fields(fields, pts + shift)
        minus = evaluate_fields(fields, pts - shift)
        for i, (p, m) in enumerate(zip(plus, minus)):
            hh = h.reshape((-1,) + (1,) * (p.ndim - 1))
            out[i].append((p - m) / (2.0 * hh))
    return [np.stack(g, axis=0) for g in out]


def check_derivatives(fields, pts, tol: float = 1e-6, name: str = "exact_vs_fd"):
    """Exact partials of every entry versus central differences.

    Residual per point: ``|exact - fd| / (1 + |exact|)``, maximised over
    entries and directions.
    """
    pts, _ = as_points(pts)
    fields = [f if isinstance(f, (Expr, MatrixField)) else MatrixField(f) for f in fields]
    exact = []
    for f in fields:
        exact.append(np.stack(evaluate_fields([f.diff(a) for a in range(NDIM)], pts), axis=0))
    fd = fd_gradient_batch(fields, pts)
    res = np.zeros(pts.shape[0])
    for ex, approx in zip(exact, fd):
        r = np.abs(ex - approx) / (1.0 + np.abs(ex))
        res = np.maximum(res, r.reshape(NDIM, pts.shape[0], -1).max(axis=(0, 2)))
    return residual_report(name, res, pts, tol)
