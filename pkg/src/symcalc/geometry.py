"""Metric and orthonormal frame encoded in a principal symbol.

``det L_prin(x, p) = -g^{ab}(x) p_a p_b`` defines the contravariant metric;
the Pauli coefficients of ``L_prin`` give the frame ``e_j^a`` with
``c_j(x, p) = e_j^a(x) p_a``.  Row ``j = 4`` (index 3) is the timelike vector.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .errors import OrthonormalityViolation, SingularMetric, WrongSignature, NearDegenerate
from .fields import NDIM, Expr, MatrixField, add, as_points, evaluate_fields, mul, power
from .report import CheckReport, residual_report
from .symbol_core import ETA, PAULI, FirstOrderOperator, standard_points


def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


_PERMS4 = [(p, _perm_sign(p)) for p in permutations(range(4))]


def det_field(M: MatrixField) -> Expr:
    """Leibniz determinant of a 4x4 (or 3x3) field."""
    n = M.shape[0]
    perms = _PERMS4 if n == 4 else [(p, _perm_sign(p)) for p in permutations(range(n))]
    return add(*(mul(float(s), *(M.entries[i, p[i]] for i in range(n))) for p, s in perms))


def inverse_field(M: MatrixField) -> MatrixField:
    """Closed-form inverse ``adj(M) / det(M)`` of a square field."""
    n = M.shape[0]
    det = det_field(M)
    inv_det = power(det, -1.0)
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            rows = [r for r in range(n) if r != j]
            cols = [c for c in range(n) if c != i]
            minor = MatrixField(M.entries[np.ix_(rows, cols)])
            out[i, j] = mul((-1.0) ** (i + j), det_field(minor) if n > 2 else minor.entries[0, 0], inv_det)
    return MatrixField(out)


def inverse4(M: np.ndarray) -> np.ndarray:
    """Batched closed-form inverse of real 4x4 matrices, shape ``(..., 4, 4)``."""
    M = np.asarray(M, dtype=float)
    det = det4(M)
    cof = np.empty_like(M)
    idx = range(4)
    for i in idx:
        for j in idx:
            rows = [r for r in idx if r != i]
            cols = [c for c in idx if c != j]
            cof[..., i, j] = (-1.0) ** (i + j) * _det3(M[..., rows, :][..., :, cols])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.swapaxes(cof, -1, -2) / det[..., None, None]


def _det3(A):
    return (A[..., 0, 0] * (A[..., 1, 1] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 1])
            - A[..., 0, 1] * (A[..., 1, 0] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 0])
            + A[..., 0, 2] * (A[..., 1, 0] * A[..., 2, 1] - A[..., 1, 1] * A[..., 2, 0]))


def det4(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M)
    out = np.zeros(M.shape[:-2], dtype=M.dtype)
    for p, s in _PERMS4:
        out = out + s * M[..., 0, p[0]] * M[..., 1, p[1]] * M[..., 2, p[2]] * M[..., 3, p[3]]
    return out


class Metric:
    """Contravariant metric field ``g^{ab}`` with its inverse and determinant.

    ``g_up`` is a 4x4 field whose values are real up to roundoff.  ``g_down``
    and ``det_down`` are derived in closed form.
    """

    def __init__(self, g_up: MatrixField):
        if g_up.shape != (NDIM, NDIM):
            raise ValueError("metric must be a 4x4 field")
        self.g_up = g_up

    @classmethod
    def constant(cls, G) -> "Metric":
        return cls(MatrixField.constant(np.asarray(G, dtype=float)))

    @property
    def det_up(self) -> Expr:
        if "_det_up" not in self.__dict__:
            self._det_up = det_field(self.g_up)
        return self._det_up

    @property
    def g_down(self) -> MatrixField:
        if "_g_down" not in self.__dict__:
            self._g_down = inverse_field(self.g_up)
        return self._g_down

    @property
    def det_down(self) -> Expr:
        """``det g_{ab}`` as a field."""
        return power(self.det_up, -1.0)

    def up(self, x) -> np.ndarray:
        return np.real(self.g_up(x))

    def down(self, x) -> np.ndarray:
        """``g_{ab}(x)`` via the batched closed-form inverse."""
        pts, single = as_points(x)
        G = inverse4(self.up(pts))
        return G[0] if single else G

    def det_down_values(self, x) -> np.ndarray:
        pts, single = as_points(x)
        with np.errstate(divide="ignore"):
            d = 1.0 / det4(self.up(pts))
        return d[0] if single else d


def extract_metric(op: FirstOrderOperator) -> Metric:
    """Polarize ``q(x, p) = det L_prin(x, p)`` to get ``g^{ab}``."""
    E = op.E
    q = {}
    for a in range(NDIM):
        q[a, a] = E[a].det2()
    out = np.empty((NDIM, NDIM), dtype=object)
    for a in range(NDIM):
        out[a, a] = mul(-1.0, q[a, a])
        for b in range(a + 1, NDIM):
            qab = (E[a] + E[b]).det2()
            val = mul(-0.5, add(qab, mul(-1.0, q[a, a]), mul(-1.0, q[b, b])))
            out[a, b] = out[b, a] = val
    return Metric(MatrixField(out))


def check_metric_invertible(g: Metric, xs=None, tol: float = 1e-12) -> CheckReport:
    pts = standard_points() if xs is None else as_points(xs)[0]
    d = np.abs(det4(g.up(pts)))
    k = int(np.argmin(d))
    report = CheckReport("metric_invertible", bool(d[k] >= tol), float(d[k]), tol,
                         [float(v) for v in pts[k]], details={"min_abs_det": float(d[k])}, kind="margin")
    if not report.passed:
        raise SingularMetric(f"|det g^ab| < {tol:g} at x={report.worst_point}", report=report,
                             location=report.worst_point)
    return report


def check_lorentzian(g: Metric, xs=None, tol: float = 1e-8) -> CheckReport:
    """Signature (+, +, +, -) with eigenvalue margin ``tol * spectral radius`` at each point.

    The report residual is the worst ``-min(|lambda|)/radius`` margin ratio;
    ``details`` carries the smallest margin seen.
    """
    pts = standard_points() if xs is None else as_points(xs)[0]
    G = g.up(pts)
    sym = np.abs(G - np.swapaxes(G, -1, -2)).max(axis=(-1, -2))
    lam = np.linalg.eigvalsh(0.5 * (G + np.swapaxes(G, -1, -2)))
    radius = np.abs(lam).max(axis=1)
    margin = np.abs(lam).min(axis=1) / np.where(radius > 0, radius, 1.0)
    n_pos = (lam > tol * radius[:, None]).sum(axis=1)
    n_neg = (lam < -tol * radius[:, None]).sum(axis=1)
    k = int(np.argmin(margin))
    report = CheckReport(
        "lorentzian",
        bool(np.all(n_pos == 3) and np.all(n_neg == 1)),
        float(margin[k]),
        tol,
        [float(v) for v in pts[k]],
        details={"min_margin": float(margin.min()), "max_asymmetry": float(sym.max())},
        kind="margin",
    )
    bad = np.flatnonzero((n_pos != 3) | (n_neg != 1))
    if bad.size:
        i = int(bad[0])
        report.worst_point = [float(v) for v in pts[i]]
        if margin[i] < tol:
            raise NearDegenerate(f"metric nearly degenerate at x={pts[i].tolist()}, eigenvalues {lam[i].tolist()}",
                                 report=report, location=pts[i].tolist(), residual=float(margin[i]))
        raise WrongSignature(f"signature is not (+,+,+,-) at x={pts[i].tolist()}: eigenvalues {lam[i].tolist()}",
                             report=report, location=pts[i].tolist(), residual=float(margin[i]))
    return report


class Frame:
    """Frame field ``e_j^a``: row j enumerates vectors, row 4 (index 3) timelike."""

    def __init__(self, e: MatrixField):
        if e.shape != (NDIM, NDIM):
            raise ValueError("frame must be a 4x4 field")
        self.e = e

    def __call__(self, x, imag_tol: float = 1e-12) -> np.ndarray:
        vals = self.e(x)
        scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
        if np.abs(vals.imag).max(initial=0.0) > imag_tol * scale:
            raise ValueError("frame has a non-negligible imaginary part; principal coefficients not Hermitian")
        return vals.real


def extract_frame(op: FirstOrderOperator) -> Frame:
    """``e_j^a = (1/2) tr(s^j E^a)`` (real for Hermitian ``E^a``)."""
    out = np.empty((NDIM, NDIM), dtype=object)
    for j in range(NDIM):
        s = MatrixField.constant(PAULI[j])
        for a in range(NDIM):
            out[j, a] = mul(0.5, (s @ op.E[a]).trace())
    return Frame(MatrixField(out))


def frame_gram(f: Frame, g: Metric, x) -> np.ndarray:
    """``g_{ab} e_j^a e_k^b`` at each point, shape ``(N, 4, 4)``."""
    pts, _ = as_points(x)
    e = f(pts)
    return np.einsum("nja,nab,nkb->njk", e, g.down(pts), e)


def check_orthonormality(f: Frame, g: Metric, xs=None, tol: float = 1e-9) -> CheckReport:
    pts = standard_points() if xs is None else as_points(xs)[0]
    gram = frame_gram(f, g, pts)
    dev = np.abs(gram - ETA)
    per_point = dev.max(axis=(-1, -2))
    report = residual_report("orthonormality", per_point, pts, tol)
    if not report.passed:
        n = int(np.argmax(per_point))
        j, k = np.unravel_index(int(np.argmax(dev[n])), (NDIM, NDIM))
        raise OrthonormalityViolation(
            f"g(e_{j + 1}, e_{k + 1}) = {gram[n, j, k]:.3e} at x={pts[n].tolist()}",
            report=report, location=(pts[n].tolist(), int(j) + 1, int(k) + 1), residual=float(per_point[n]),
        )
    return report


def metric_from_frame_values(e: np.ndarray) -> np.ndarray:
    """``g^{ab} = e_j^a eta^{jk} e_k^b`` for frame values ``(..., 4, 4)``."""
    return np.einsum("...ja,jk,...kb->...ab", e, ETA, e)


def evaluate_geometry(op: FirstOrderOperator, x) -> dict:
    """Metric (both index positions) and frame values at points, in one pass."""
    pts, _ = as_points(x)
    g = extract_metric(op)
    f = extract_frame(op)
    gup, e = evaluate_fields([g.g_up, f.e], pts)
    return {"g_up": gup.real, "g_down": inverse4(gup.real), "frame": e.real}
