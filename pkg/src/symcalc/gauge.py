"""SL(2, C) gauge maps, the three-slot Poisson bracket and the covariant subprincipal symbol."""

from __future__ import annotations


import numpy as np

from .errors import CovarianceViolation, NonHermitianResult, NotSpecialLinear
from .fields import NDIM, Expr, MatrixField, as_points, coords, cos, evaluate_fields, exp, mul, sin
from .geometry import Metric, extract_metric
from .report import CheckReport, residual_report
from .symbol_core import (
    FirstOrderOperator,
    _hermitian_residuals,
    assemble_operator,
    standard_points,
)

DET_TOL = 1e-10


def matrix_adjugate(M) -> np.ndarray:
    """``[[a, b], [c, d]] -> [[d, -b], [-c, a]]`` over the last two axes."""
    M = np.asarray(M)
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 1, 1] = M[..., 0, 0]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    return out


class GaugeMap:
    """A smooth field ``R(x)`` of determinant-one complex 2x2 matrices."""

    def __init__(self, R: MatrixField, validate: bool = True, points=None, name: str = "gauge"):
        if not isinstance(R, MatrixField):
            R = MatrixField.constant(R)
        if R.shape != (2, 2):
            raise ValueError("gauge map must be a 2x2 field")
        self.R = R
        self.name = name
        if validate:
            pts = standard_points() if points is None else as_points(points)[0]
            dev = np.abs(R.det2()(pts) - 1.0)
            if dev.max() > DET_TOL:
                k = int(np.argmax(dev))
                raise NotSpecialLinear(
                    f"|det R - 1| = {dev[k]:.3e} at x={pts[k].tolist()}",
                    report=residual_report("det_one", dev, pts, DET_TOL),
                    location=pts[k].tolist(), residual=float(dev[k]),
                )

    def __call__(self, x) -> np.ndarray:
        return self.R(x)

    def __matmul__(self, other: "GaugeMap") -> "GaugeMap":
        return GaugeMap(self.R @ other.R, validate=False, name=f"{self.name}*{other.name}")

    @classmethod
    def identity(cls) -> "GaugeMap":
        return cls(MatrixField.constant(np.eye(2)), name="identity")

    @classmethod
    def constant(cls, M, name="constant") -> "GaugeMap":
        return cls(MatrixField.constant(M), name=name)

    @classmethod
    def diagonal(cls, h, name="diagonal") -> "GaugeMap":
        """``diag(e^h, e^-h)`` for a scalar field ``h``."""
        return cls(MatrixField([[exp(h), 0.0], [0.0, exp(-h)]]), validate=False, name=name)

    @classmethod
    def upper(cls, f, name="upper") -> "GaugeMap":
        """``[[1, f], [0, 1]] = exp([[0, f], [0, 0]])``."""
        return cls(MatrixField([[1.0, f], [0.0, 1.0]]), validate=False, name=name)

    @classmethod
    def lower(cls, f, name="lower") -> "GaugeMap":
        return cls(MatrixField([[1.0, 0.0], [f, 1.0]]), validate=False, name=name)


def _random_scalar(rng, amplitude: float) -> Expr:
    """A bounded smooth complex scalar ``amplitude * z * cos(k.x + phi)`` with ``|z| <= 1``."""
    x = coords()
    k = rng.uniform(-1.5, 1.5, size=NDIM)
    phi = rng.uniform(0, 2 * np.pi)
    z = rng.uniform(0.2, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    arg = sum(mul(float(k[a]), x[a]) for a in range(NDIM)) + float(phi)
    return mul(complex(amplitude * z), cos(arg))


def random_gauge(rng: np.random.Generator, amplitude: float = 0.5, name: str = "random") -> GaugeMap:
    """Random smooth SL(2, C) field as a product of exponentials of traceless fields.

    ``R = exp(N_lower) exp(H) exp(N_upper)`` with ``H`` diagonal traceless and
    ``N`` nilpotent; every factor has determinant one exactly.  Entries of the
    generators are bounded by ``amplitude``.
    """
    h = _random_scalar(rng, amplitude)
    f = _random_scalar(rng, amplitude)
    g = _random_scalar(rng, amplitude)
    R = GaugeMap.lower(g) @ GaugeMap.diagonal(h) @ GaugeMap.upper(f)
    R.name = name
    return R


def apply_gauge(op: FirstOrderOperator, R: GaugeMap, validate: bool = True) -> FirstOrderOperator:
    """The operator ``R^* L R``.

    Local coefficients ``F'^a = R^* F^a R`` and
    ``G' = R^* G R + R^* F^a dR/dx^a``; symbols follow from
    :func:`assemble_operator`.
    """
    Rm = R.R
    Rh = Rm.H
    F = tuple(Rh @ f @ Rm for f in op.F)
    G = Rh @ op.G @ Rm
    for a in range(NDIM):
        dR = Rm.diff(a)
        if all(e.is_zero for e in dR.flat()):
            continue
        G = G + Rh @ op.F[a] @ dR
    return assemble_operator(F, G, validate=validate)


class SymbolPolynomial:
    """Matrix-valued polynomial in momentum with field coefficients.

    ``terms`` maps a sorted tuple of momentum indices (the monomial
    ``p_{i1} p_{i2} ...``) to a 2x2 MatrixField coefficient.
    """

    def __init__(self, terms=None):
        self.terms = {}
        for mono, coeff in (terms or {}).items():
            self.terms[tuple(sorted(mono))] = coeff

    @classmethod
    def principal(cls, op: FirstOrderOperator) -> "SymbolPolynomial":
        return cls({(a,): op.E[a] for a in range(NDIM)})

    @classmethod
    def from_linear(cls, E, const=None) -> "SymbolPolynomial":
        terms = {(a,): E[a] for a in range(NDIM)}
        if const is not None:
            terms[()] = const
        return cls(terms)

    def map(self, fn) -> "SymbolPolynomial":
        return SymbolPolynomial({m: fn(c) for m, c in self.terms.items()})

    def adj(self) -> "SymbolPolynomial":
        return self.map(lambda c: c.adj())

    def diff_x(self, alpha: int) -> "SymbolPolynomial":
        return self.map(lambda c: c.diff(alpha))

    def diff_p(self, alpha: int) -> "SymbolPolynomial":
        out = {}
        for mono, coeff in self.terms.items():
            k = mono.count(alpha)
            if k == 0:
                continue
            rest = list(mono)
            rest.remove(alpha)
            out[tuple(rest)] = _acc(out.get(tuple(rest)), coeff * float(k))
        return SymbolPolynomial(out)

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = _acc(out.get(m), c)
        return SymbolPolynomial(out)

    def __sub__(self, other):
        return self + other.map(lambda c: -c)

    def __matmul__(self, other):
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                out[m] = _acc(out.get(m), c1 @ c2)
        return SymbolPolynomial(out)

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def __call__(self, x, p) -> np.ndarray:
        pts, single = as_points(x)
        p = np.broadcast_to(np.asarray(p, dtype=float), pts.shape)
        monos = list(self.terms)
        vals = evaluate_fields([self.terms[m] for m in monos], pts)
        out = np.zeros((pts.shape[0], 2, 2), dtype=complex)
        for m, v in zip(monos, vals):
            w = np.ones(pts.shape[0])
            for i in m:
                w = w * p[:, i]
            out += w[:, None, None] * v
        return out[0] if single else out


def _acc(acc, c):
    return c if acc is None else acc + c


def poisson_bracket3(F: SymbolPolynomial, G: SymbolPolynomial, H: SymbolPolynomial) -> SymbolPolynomial:
    """``{F, G, H} = F_{x^a} G H_{p_a} - F_{p_a} G H_{x^a}``."""
    out = SymbolPolynomial()
    for a in range(NDIM):
        out = out + (F.diff_x(a) @ G @ H.diff_p(a)) - (F.diff_p(a) @ G @ H.diff_x(a))
    return out


def bracket_tensor(E) -> dict:
    """``T^{mn} = E^m_{,c} adj(E^n) E^c - E^c adj(E^n) E^m_{,c}`` (summed over c)."""
    adjE = [e.adj() for e in E]
    dE = [[E[m].diff(c) for c in range(NDIM)] for m in range(NDIM)]
    T = {}
    for m in range(NDIM):
        for n in range(NDIM):
            acc = MatrixField.zeros((2, 2))
            for c in range(NDIM):
                if all(e.is_zero for e in dE[m][c].flat()):
                    continue
                acc = acc + dE[m][c] @ adjE[n] @ E[c] - E[c] @ adjE[n] @ dE[m][c]
            T[m, n] = acc
    return T


def bracket_correction(E, g_down: MatrixField) -> MatrixField:
    """``(i/16) g_{ab} {L_prin, adj L_prin, L_prin}_{p_a p_b}`` in closed form.

    With ``L_prin = E^m p_m`` the second momentum derivative of the bracket
    is ``T^{ab} + T^{ba}``.
    """
    T = bracket_tensor(E)
    acc = MatrixField.zeros((2, 2))
    for a in range(NDIM):
        for b in range(NDIM):
            term = T[a, b] + T[b, a]
            if all(e.is_zero for e in term.flat()):
                continue
            acc = acc + term * g_down.entries[a, b]
    return acc * (1j / 16.0)


def bracket_correction_generic(E, g_down: MatrixField) -> MatrixField:
    """Same correction built through :func:`poisson_bracket3` and symbolic p-differentiation."""
    P = SymbolPolynomial.from_linear(E)
    B = poisson_bracket3(P, P.adj(), P)
    acc = MatrixField.zeros((2, 2))
    for a in range(NDIM):
        for b in range(NDIM):
            d2 = B.diff_p(a).diff_p(b)
            if () not in d2.terms:
                continue
            acc = acc + d2.terms[()] * g_down.entries[a, b]
    return acc * (1j / 16.0)


def covariant_subprincipal(op: FirstOrderOperator, g: Metric | None = None, check: bool = True,
                           points=None, tol: float = 1e-10) -> MatrixField:
    """``L_csub = L_sub + bracket correction``; Hermitian or :class:`NonHermitianResult`."""
    g = extract_metric(op) if g is None else g
    csub = op.S + bracket_correction(op.E, g.g_down)
    if check:
        pts = standard_points() if points is None else as_points(points)[0]
        res = _hermitian_residuals(csub(pts))
        if res.max() > tol:
            k = int(np.argmax(res))
            raise NonHermitianResult(
                f"covariant subprincipal symbol not Hermitian ({res[k]:.3e}) at x={pts[k].tolist()}",
                report=residual_report("csub_hermitian", res, pts, tol),
                location=pts[k].tolist(), residual=float(res[k]),
            )
    return csub


def check_csub_hermitian(op: FirstOrderOperator, xs=None, tol: float = 1e-10) -> CheckReport:
    pts = standard_points() if xs is None else as_points(xs)[0]
    csub = covariant_subprincipal(op, check=False)
    return residual_report("csub_hermitian", _hermitian_residuals(csub(pts)), pts, tol)


def verify_csub_covariance(op: FirstOrderOperator, R: GaugeMap, xs=None, tol: float = 1e-8) -> CheckReport:
    """Check ``L_csub(R^* L R) = R^* L_csub(L) R`` pointwise.

    Residual at x is ``|Delta(x)| / (1 + |L_csub(x)|)`` (Frobenius norms).
    """
    pts = standard_points() if xs is None else as_points(xs)[0]
    gauged = apply_gauge(op, R, validate=False)
    c0 = covariant_subprincipal(op, check=False)
    c1 = covariant_subprincipal(gauged, check=False)
    v0, v1, Rv = evaluate_fields([c0, c1, R.R], pts)
    expect = np.conj(np.swapaxes(Rv, -1, -2)) @ v0 @ Rv
    delta = np.linalg.norm(v1 - expect, axis=(-1, -2))
    res = delta / (1.0 + np.linalg.norm(v0, axis=(-1, -2)))
    report = residual_report(f"csub_covariance[{R.name}]", res, pts, tol)
    if not report.passed:
        raise CovarianceViolation(
            f"covariance residual {report.max_residual:.3e} at x={report.worst_point}",
            report=report, location=report.worst_point, residual=report.max_residual,
        )
    return report


def catalog_gauges() -> dict:
    """Named smooth SL(2, C) maps used across the verification suites."""
    x = coords()
    boost = np.array([[np.cosh(0.4), np.sinh(0.4)], [np.sinh(0.4), np.cosh(0.4)]], dtype=complex)
    rot = np.array([[np.exp(0.3j), 0], [0, np.exp(-0.3j)]])
    gauges = {
        "identity": GaugeMap.identity(),
        "constant-boost": GaugeMap.constant(boost @ rot, name="constant-boost"),
        "diag-exp-x1": GaugeMap.diagonal(x[0], name="diag-exp-x1"),
        "diag-sin-x2": GaugeMap.diagonal(mul(0.3, sin(x[1])), name="diag-sin-x2"),
        "shear-mixed": GaugeMap.lower(mul(0.2, sin(x[3])) + mul(0.1j, x[0]))
        @ GaugeMap.upper(mul(0.3, exp(mul(1j, x[2])))),
    }
    gauges["shear-mixed"].name = "shear-mixed"
    return gauges
