"""Classification scalars c(L), t(L) and spin-structure witness checks.

Given a reference operator with frame ``ee_j`` and another operator with
frame ``e_j`` for the same metric,

    c(L) = -(1/4!) (ee_1 ^ ee_2 ^ ee_3 ^ ee_4)_{klmn} (e_1 ^ e_2 ^ e_3 ^ e_4)^{klmn}
    t(L) = -ee_{4a} e_4^a

where the wedge of four vectors is the full antisymmetrized sum (no
1/4! normalisation), so ``c = -det(ee_lowered) det(e)`` and ``|c| = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import (
    InconsistentSigns,
    MetricMismatch,
    NotInPositiveClass,
    NotUnitValue,
    VanishingT,
    WitnessFails,
)
from .fields import NDIM, as_points, evaluate_fields
from .gauge import GaugeMap
from .geometry import _perm_sign, det4, extract_frame, extract_metric, inverse4
from .report import CheckReport, residual_report
from .symbol_core import FirstOrderOperator, eval_principal, standard_points

METRIC_TOL = 1e-8


@dataclass(frozen=True)
class ClassificationTag:
    sign_c: int
    sign_t: int

    def __post_init__(self):
        if self.sign_c not in (1, -1) or self.sign_t not in (1, -1):
            raise ValueError("classification signs must be +1 or -1")

    def as_tuple(self) -> tuple:
        return (self.sign_c, self.sign_t)


class ReferencePair:
    """The fixed reference operator and its frame."""

    def __init__(self, op: FirstOrderOperator):
        self.op = op
        self.metric = extract_metric(op)
        self.frame = extract_frame(op)


def _geometry_pair(ref: ReferencePair, op: FirstOrderOperator, x, tol=METRIC_TOL):
    pts, single = as_points(x)
    g_ref = extract_metric(ref.op)
    g_op = extract_metric(op)
    gu_ref, gu_op, e_ref, e_op = evaluate_fields([g_ref.g_up, g_op.g_up, ref.frame.e, extract_frame(op).e], pts)
    gu_ref, gu_op = gu_ref.real, gu_op.real
    dev = np.abs(gu_op - gu_ref).max(axis=(-1, -2)) / (1.0 + np.abs(gu_ref).max(axis=(-1, -2)))
    if dev.max() > tol:
        k = int(np.argmax(dev))
        raise MetricMismatch(
            f"operator metric differs from the reference metric by {dev[k]:.3e} at x={pts[k].tolist()}",
            report=residual_report("metric_match", dev, pts, tol), location=pts[k].tolist(), residual=float(dev[k]),
        )
    return pts, single, inverse4(gu_ref), e_ref.real, e_op.real


def chi_c(ref: ReferencePair, op: FirstOrderOperator, x, unit_tol: float = 1e-9):
    """Orientation scalar ``c(L)``; must equal +1 or -1."""
    pts, single, g_dn, e_ref, e_op = _geometry_pair(ref, op, x)
    lowered = np.einsum("nab,njb->nja", g_dn, e_ref)
    c = -det4(lowered) * det4(e_op)
    dev = np.abs(np.abs(c) - 1.0)
    if dev.max() > unit_tol:
        k = int(np.argmax(dev))
        raise NotUnitValue(f"c(L) = {c[k]:.12g} is not +-1 at x={pts[k].tolist()}",
                           location=pts[k].tolist(), residual=float(dev[k]))
    return c[0] if single else c


def _wedge4(vectors: np.ndarray) -> np.ndarray:
    """Antisymmetrized product ``sum_sigma sgn(sigma) v_s1 (x) v_s2 (x) v_s3 (x) v_s4``, shape (4,4,4,4)."""
    out = np.zeros((NDIM,) * 4)
    for perm in permutations(range(4)):
        s = _perm_sign(perm)
        v = [vectors[i] for i in perm]
        out += s * np.einsum("a,b,c,d->abcd", *v)
    return out


def chi_c_contraction(ref: ReferencePair, op: FirstOrderOperator, x) -> np.ndarray:
    """``c(L)`` by explicit wedge construction and full index contraction (oracle path)."""
    pts, single, g_dn, e_ref, e_op = _geometry_pair(ref, op, x)
    out = np.empty(pts.shape[0])
    for n in range(pts.shape[0]):
        low = _wedge4(e_ref[n] @ g_dn[n])
        up = _wedge4(e_op[n])
        out[n] = -np.einsum("abcd,abcd->", low, up) / 24.0
    return out[0] if single else out


def chi_t(ref: ReferencePair, op: FirstOrderOperator, x, zero_tol: float = 1e-12):
    """Time-orientation scalar ``t(L) = -g_ab ee_4^b e_4^a``; never zero."""
    pts, single, g_dn, e_ref, e_op = _geometry_pair(ref, op, x)
    t = -np.einsum("nab,nb,na->n", g_dn, e_ref[:, 3], e_op[:, 3])
    if np.any(np.abs(t) < zero_tol):
        k = int(np.argmin(np.abs(t)))
        raise VanishingT(f"t(L) vanishes at x={pts[k].tolist()}", location=pts[k].tolist(), residual=float(t[k]))
    return t[0] if single else t


def classify(ref: ReferencePair, op: FirstOrderOperator, xs=None) -> ClassificationTag:
    """Signs of ``c(L)`` and ``t(L)``, required constant over the sample."""
    pts = standard_points() if xs is None else as_points(xs)[0]
    sc = np.sign(chi_c(ref, op, pts))
    st = np.sign(chi_t(ref, op, pts))
    for name, s in (("c", sc), ("t", st)):
        if not np.all(s == s[0]):
            k = int(np.flatnonzero(s != s[0])[0])
            raise InconsistentSigns(f"sign of {name}(L) changes between x={pts[0].tolist()} and x={pts[k].tolist()}",
                                    location=(pts[0].tolist(), pts[k].tolist()))
    return ClassificationTag(int(sc[0]), int(st[0]))


def check_equivalence_witness(op_a: FirstOrderOperator, op_b: FirstOrderOperator, R: GaugeMap, xs=None,
                              ref: ReferencePair | None = None, tol: float = 1e-8) -> CheckReport:
    """Verify ``(op_b)_prin = R^* (op_a)_prin R`` at the sample points and the 4 basis momenta.

    Both operators must sit in the (+1, +1) class against ``ref``
    (default: ``op_a`` itself).
    """
    pts = standard_points() if xs is None else as_points(xs)[0]
    ref = ReferencePair(op_a) if ref is None else ref
    for label, op in (("A", op_a), ("B", op_b)):
        tag = classify(ref, op, pts)
        if tag.as_tuple() != (1, 1):
            raise NotInPositiveClass(f"operator {label} has class {tag.as_tuple()}, need (+1, +1)")
    Rv = R(pts)
    Rh = np.conj(np.swapaxes(Rv, -1, -2))
    res = np.zeros(pts.shape[0])
    for a in range(NDIM):
        p = np.eye(NDIM)[a]
        La = eval_principal(op_a, pts, p)
        Lb = eval_principal(op_b, pts, p)
        r = np.linalg.norm(Lb - Rh @ La @ Rv, axis=(-1, -2))
        res = np.maximum(res, r)
    report = residual_report(f"equivalence_witness[{R.name}]", res, pts, tol)
    if not report.passed:
        raise WitnessFails(f"witness residual {report.max_residual:.3e} at x={report.worst_point}",
                           report=report, location=report.worst_point, residual=report.max_residual)
    return report
