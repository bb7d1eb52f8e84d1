"""Electromagnetic covector potential and operator adjugation."""

from __future__ import annotations

import numpy as np

from .errors import AdjugationLawViolation, IllConditionedFrame
from .fields import MatrixField, as_points, evaluate_fields
from .gauge import bracket_correction, covariant_subprincipal
from .geometry import Frame, Metric, extract_frame, extract_metric, inverse4
from .report import CheckReport, residual_report
from .symbol_core import PAULI, FirstOrderOperator, operator_from_symbols, pauli_coefficients, standard_points

COND_LIMIT = 1e8


class CovectorPotential:
    """The real covector ``A`` with ``L_csub(x) = L_prin(x, A(x))``.

    Values are solved on demand at query points from the frame and the
    Pauli coefficients of ``L_csub``; nothing is fitted globally.
    """

    def __init__(self, frame: Frame, csub: MatrixField, imag_tol: float = 1e-10):
        self.frame = frame
        self.csub = csub
        self.imag_tol = imag_tol

    def solve(self, x) -> tuple:
        """Return ``(A, residual)`` at points; residual is the re-substitution error."""
        pts, single = as_points(x)
        e_c, cs = evaluate_fields([self.frame.e, self.csub], pts)
        e = e_c.real
        cond = np.linalg.cond(e)
        if np.any(cond > COND_LIMIT):
            k = int(np.argmax(cond))
            raise IllConditionedFrame(f"frame condition number {cond[k]:.3e} at x={pts[k].tolist()}",
                                      location=pts[k].tolist(), residual=float(cond[k]))
        c = pauli_coefficients(cs)
        scale = np.maximum(np.abs(c).max(axis=1), 1.0)
        imag = np.abs(c.imag).max(axis=1) / scale
        if imag.max() > self.imag_tol:
            raise ValueError(f"covariant subprincipal symbol has non-real Pauli coefficients ({imag.max():.2e})")
        # e_j^a A_a = c_j
        A = np.einsum("nak,nk->na", inverse4(e), c.real)
        back = np.einsum("nja,na->nj", e, A)
        resub = np.einsum("nj,jkl->nkl", back, PAULI) - cs
        residual = np.linalg.norm(resub, axis=(-1, -2))
        if single:
            return A[0], residual[0]
        return A, residual

    def __call__(self, x) -> np.ndarray:
        return self.solve(x)[0]


def extract_potential(op: FirstOrderOperator, g: Metric | None = None) -> CovectorPotential:
    g = extract_metric(op) if g is None else g
    return CovectorPotential(extract_frame(op), covariant_subprincipal(op, g, check=False))


def check_potential_resubstitution(op: FirstOrderOperator, xs=None, tol: float = 1e-9) -> CheckReport:
    pts = standard_points() if xs is None else as_points(xs)[0]
    _, res = extract_potential(op).solve(pts)
    return residual_report("potential_resubstitution", res, pts, tol)


def adjugate_operator(op: FirstOrderOperator, g: Metric | None = None, validate: bool = True) -> FirstOrderOperator:
    """The operator whose principal and covariant subprincipal symbols are adjugates of those of ``op``.

    ``E_adj^a = adj E^a``; ``S_adj = adj(L_csub) - correction(E_adj)`` with
    the correction evaluated on the adjugated coefficients and the original
    metric (``det adj M = det M`` for 2x2, so the metrics agree).
    """
    g = extract_metric(op) if g is None else g
    E_adj = tuple(e.adj() for e in op.E)
    csub = covariant_subprincipal(op, g, check=False)
    S_adj = csub.adj() - bracket_correction(E_adj, g.g_down)
    return operator_from_symbols(E_adj, S_adj, validate=validate)


def verify_adjugation_laws(op: FirstOrderOperator, xs=None, tol_involution: float = 1e-10,
                           tol_metric: float = 1e-10, tol_potential: float = 1e-9) -> list:
    """Check Adj Adj L = L, and invariance of metric and potential under Adj.

    Returns three reports; raises :class:`AdjugationLawViolation` on the first failure.
    """
    pts = standard_points() if xs is None else as_points(xs)[0]
    adj = adjugate_operator(op, validate=False)
    adj2 = adjugate_operator(adj, validate=False)

    fields = list(op.E) + [op.S] + list(adj2.E) + [adj2.S]
    vals = evaluate_fields(fields, pts)
    orig = np.stack(vals[:5], axis=1)
    back = np.stack(vals[5:], axis=1)
    scale = 1.0 + np.linalg.norm(orig, axis=(-1, -2)).max(axis=1)
    inv_res = np.linalg.norm(back - orig, axis=(-1, -2)).max(axis=1) / scale
    r_inv = residual_report("adj_involution", inv_res, pts, tol_involution)

    g0 = extract_metric(op).up(pts)
    g1 = extract_metric(adj).up(pts)
    met_res = np.abs(g1 - g0).max(axis=(-1, -2)) / (1.0 + np.abs(g0).max(axis=(-1, -2)))
    r_met = residual_report("adj_metric_invariance", met_res, pts, tol_metric)

    A0 = extract_potential(op)(pts)
    A1 = extract_potential(adj)(pts)
    pot_res = np.abs(A1 - A0).max(axis=1)
    r_pot = residual_report("adj_potential_invariance", pot_res, pts, tol_potential)

    reports = [r_inv, r_met, r_pot]
    for which, r in zip(("involution", "metric", "potential"), reports):
        if not r.passed:
            raise AdjugationLawViolation(
                f"adjugation {which} law fails: residual {r.max_residual:.3e} at x={r.worst_point}",
                report=r, location=(which, r.worst_point), residual=r.max_residual,
            )
    return reports
