"""First-order 2x2 operators, their principal and subprincipal symbols.

In local coordinates the operator is ``L = F^a(x) d/dx^a + G(x)`` acting on
2-columns of half-densities.  We store it through its symbols:

* principal coefficients ``E^a = i F^a`` so that ``L_prin(x, p) = E^a(x) p_a``;
* subprincipal symbol ``S = G + (i/2) d_a E^a``.

Both are Hermitian exactly when ``L`` is formally self-adjoint.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import DegeneratePrincipalSymbol, NonHermitianSymbol
from .fields import NDIM, Expr, MatrixField, as_points, coords, evaluate_fields, exp, mul
from .report import CheckReport, residual_report

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
        [[1, 0], [0, 1]],
    ],
    dtype=complex,
)
"""The basis s^1..s^4 of 2x2 Hermitian matrices (index 0..3)."""

ETA = np.diag([1.0, 1.0, 1.0, -1.0])

HERMITIAN_TOL = 1e-12
SYMMETRIZE_TOL = 1e-9
SAMPLE_SEED = 20140901
N_MOMENTA = 256


def pauli_expand(c) -> np.ndarray:
    """``sum_j c_j s^j`` for coefficients of shape ``(..., 4)``."""
    return np.einsum("...j,jab->...ab", np.asarray(c), PAULI)


def pauli_coefficients(M) -> np.ndarray:
    """Complex coefficients ``(1/2) tr(s^j M)``; real for Hermitian ``M``."""
    return 0.5 * np.einsum("jab,...ba->...j", PAULI, np.asarray(M))


def pauli_field(c) -> MatrixField:
    """Matrix field ``sum_j c_j(x) s^j`` from four scalar fields or numbers."""
    out = MatrixField.zeros((2, 2))
    for j in range(4):
        out = out + MatrixField.constant(PAULI[j]) * c[j]
    return out


def is_hermitian(M, tol=HERMITIAN_TOL) -> bool:
    M = np.asarray(M)
    return bool(np.linalg.norm(M - M.conj().T) <= tol * np.linalg.norm(M))


def standard_points() -> np.ndarray:
    """The standard sample set: 3^4 grid on [-1, 1]^4 plus 20 seeded random points."""
    axis = np.array([-1.0, 0.0, 1.0])
    grid = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, NDIM)
    rng = np.random.default_rng(SAMPLE_SEED)
    extra = rng.uniform(-1.0, 1.0, size=(20, NDIM))
    return np.vstack([grid, extra])


def grid_points(n: int, half_width: float = 1.0) -> np.ndarray:
    """Tensor grid with ``n`` points per axis on ``[-half_width, half_width]^4``."""
    if n < 1:
        raise ValueError("grid needs at least one point per axis")
    axis = np.linspace(-half_width, half_width, n) if n > 1 else np.zeros(1)
    return np.stack(np.meshgrid(*([axis] * NDIM), indexing="ij"), axis=-1).reshape(-1, NDIM)


def momentum_sample(n: int = N_MOMENTA) -> np.ndarray:
    """Deterministic unit covectors: the 8 axis directions then ``n`` Halton points on S^3."""
    halton = qmc.Halton(d=NDIM, scramble=False)
    u = halton.random(n + 1)[1:]
    z = ndtri(u)
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    axes = np.vstack([np.eye(NDIM), -np.eye(NDIM)])
    return np.vstack([axes, z])


def _hermitian_residuals(vals):
    vals = np.asarray(vals).reshape((-1, 2, 2))
    diff = np.linalg.norm(vals - np.conj(np.swapaxes(vals, -1, -2)), axis=(-1, -2))
    scale = np.maximum(np.linalg.norm(vals, axis=(-1, -2)), 1.0)
    return diff / scale


def _check_hermitian(field: MatrixField, label: str, points) -> MatrixField:
    res = _hermitian_residuals(field(points))
    worst = float(res.max(initial=0.0))
    if worst <= HERMITIAN_TOL:
        return field
    k = int(np.argmax(res))
    if worst <= SYMMETRIZE_TOL:
        warnings.warn(f"{label} is Hermitian only to {worst:.2e}; symmetrizing", stacklevel=3)
        return 0.5 * (field + field.H)
    report = residual_report(f"hermitian[{label}]", res, points, HERMITIAN_TOL)
    raise NonHermitianSymbol(
        f"{label} is not Hermitian: residual {worst:.3e} at x={points[k].tolist()}",
        report=report,
        location=points[k].tolist(),
        residual=worst,
    )


@dataclass(frozen=True, eq=False)
class FirstOrderOperator:
    """A formally self-adjoint first-order 2x2 operator, stored by its symbols.

    Parameters
    ----------
    E : tuple of four 2x2 MatrixField
        Principal coefficients, ``L_prin(x, p) = sum_a E[a](x) p_a``.
    S : MatrixField
        Subprincipal symbol ``L_sub(x)``.
    """

    E: tuple
    S: MatrixField

    @cached_property
    def F(self) -> tuple:
        return tuple((-1j) * e for e in self.E)

    @cached_property
    def G(self) -> MatrixField:
        div = MatrixField.zeros((2, 2))
        for a in range(NDIM):
            div = div + self.E[a].diff(a)
        return self.S - 0.5j * div

    @property
    def symbols(self) -> tuple:
        return self.E, self.S

    def principal_field(self, p) -> MatrixField:
        """``L_prin(., p)`` for a fixed covector ``p``."""
        out = MatrixField.zeros((2, 2))
        for a in range(NDIM):
            if p[a] != 0:
                out = out + self.E[a] * float(p[a])
        return out

    def __neg__(self) -> "FirstOrderOperator":
        return FirstOrderOperator(tuple(-e for e in self.E), -self.S)

    def __mul__(self, c) -> "FirstOrderOperator":
        c = float(c)
        return FirstOrderOperator(tuple(e * c for e in self.E), self.S * c)

    __rmul__ = __mul__


def _as_four(fields) -> tuple:
    fields = tuple(fields)
    if len(fields) != NDIM:
        raise ValueError(f"need {NDIM} coefficient fields, got {len(fields)}")
    out = []
    for f in fields:
        f = f if isinstance(f, MatrixField) else MatrixField.constant(f)
        if f.shape != (2, 2):
            raise ValueError("coefficients must be 2x2 matrix fields")
        out.append(f)
    return tuple(out)


def operator_from_symbols(E, S, validate: bool = True, points=None) -> FirstOrderOperator:
    """Build an operator directly from principal coefficients and subprincipal symbol."""
    E = _as_four(E)
    S = S if isinstance(S, MatrixField) else MatrixField.constant(S)
    if validate:
        pts = standard_points() if points is None else as_points(points)[0]
        E = tuple(_check_hermitian(e, f"E^{a + 1}", pts) for a, e in enumerate(E))
        S = _check_hermitian(S, "L_sub", pts)
    return FirstOrderOperator(E, S)


def assemble_operator(F, G, validate: bool = True, points=None) -> FirstOrderOperator:
    """Build an operator from local coefficients ``F^a`` and ``G``.

    ``E^a = i F^a`` and ``S = G + (i/2) sum_a d(i F^a)/dx^a``.  Raises
    :class:`NonHermitianSymbol` when the result is not formally self-adjoint.
    """
    F = _as_four(F)
    G = G if isinstance(G, MatrixField) else MatrixField.constant(G)
    E = tuple(1j * f for f in F)
    div = MatrixField.zeros((2, 2))
    for a in range(NDIM):
        div = div + E[a].diff(a)
    S = G + 0.5j * div
    return operator_from_symbols(E, S, validate=validate, points=points)


def eval_principal(op: FirstOrderOperator, x, p) -> np.ndarray:
    """``L_prin(x, p)``.  ``x`` and ``p`` broadcast as ``(N, 4)`` arrays or single 4-tuples."""
    pts, single = as_points(x)
    p = np.asarray(p, dtype=float)
    E = np.stack(evaluate_fields(op.E, pts), axis=1)  # (N, 4, 2, 2)
    if p.ndim == 1:
        out = np.einsum("nakl,a->nkl", E, p)
    else:
        out = np.einsum("nakl,na->nkl", E, np.broadcast_to(p, (pts.shape[0], NDIM)))
    return out[0] if single else out


def eval_subprincipal(op: FirstOrderOperator, x) -> np.ndarray:
    return op.S(x)


def check_nondegeneracy(op: FirstOrderOperator, xs=None, n_p: int = N_MOMENTA,
                        tol: float = 1e-8) -> CheckReport:
    """Sample ``L_prin(x, p) != 0`` over x in ``xs`` and unit covectors p.

    The measured quantity at each (x, p) is the operator norm of
    ``L_prin(x, p)`` relative to its largest value over the whole sample;
    it must exceed ``tol``.  The report's ``max_residual`` slot carries the
    smallest ratio found, and ``worst_point`` is ``x`` followed by ``p``.
    """
    if n_p < 64:
        raise ValueError("momentum sample must have at least 64 directions")
    pts = standard_points() if xs is None else as_points(xs)[0]
    P = momentum_sample(n_p)
    E = np.stack(evaluate_fields(op.E, pts), axis=1)
    Lp = np.einsum("nakl,ma->nmkl", E, P)
    norms = np.linalg.norm(Lp, ord=2, axis=(-2, -1))  # (N, M)
    scale = float(norms.max())
    ratio = norms / scale if scale > 0 else np.zeros_like(norms)
    n, m = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    worst_ratio = float(ratio[n, m])
    report = CheckReport(
        "nondegeneracy",
        worst_ratio > tol,
        worst_ratio,
        tol,
        [float(v) for v in np.concatenate([pts[n], P[m]])],
        details={"min_norm_ratio": worst_ratio, "n_points": int(pts.shape[0]), "n_momenta": int(P.shape[0])},
        kind="margin",
    )
    if not report.passed:
        raise DegeneratePrincipalSymbol(
            f"principal symbol (nearly) vanishes at x={pts[n].tolist()}, p={P[m].tolist()}",
            report=report,
            location=(pts[n].tolist(), P[m].tolist()),
            residual=worst_ratio,
        )
    return report


def applied_field(op: FirstOrderOperator, v: MatrixField) -> MatrixField:
    """The 2-column field ``L v = F^a dv/dx^a + G v``."""
    if v.shape != (2,):
        raise ValueError("operator acts on 2-columns")
    out = op.G @ v
    for a in range(NDIM):
        out = out + op.F[a] @ v.diff(a)
    return out


def apply_operator(op: FirstOrderOperator, v: MatrixField, x) -> np.ndarray:
    """Evaluate ``(L v)(x)`` using exact derivatives of ``v``."""
    pts, single = as_points(x)
    vals = evaluate_fields(list(op.F) + [op.G, v] + [v.diff(a) for a in range(NDIM)], pts)
    F, G, vv, dv = vals[:4], vals[4], vals[5], vals[6:]
    out = np.einsum("nkl,nl->nk", G, vv)
    for a in range(NDIM):
        out = out + np.einsum("nkl,nl->nk", F[a], dv[a])
    return out[0] if single else out


def two_column(v1, v2) -> MatrixField:
    return MatrixField([v1, v2])


def gaussian_window(sigma: float = 0.6, center=(0.0, 0.0, 0.0, 0.0)) -> Expr:
    """``exp(-|x - center|^2 / (2 sigma^2))`` as a scalar field."""
    x = coords()
    r2 = sum(mul(x[a] - center[a], x[a] - center[a]) for a in range(NDIM))
    return exp(r2 * (-0.5 / sigma**2))


@dataclass(frozen=True)
class QuadratureGrid:
    """Trapezoidal tensor grid on ``[-half_width, half_width]^4``."""

    half_width: float = 3.6
    n: int = 25

    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    def weights(self) -> np.ndarray:
        h = 2.0 * self.half_width / (self.n - 1)
        w = np.full(self.n, h)
        w[0] = w[-1] = 0.5 * h
        return w


def inner_product(v: MatrixField, w: MatrixField, grid: QuadratureGrid = QuadratureGrid()) -> complex:
    """Trapezoidal approximation of ``<v, w> = int w^* v dx`` over the grid box.

    Fields should be windowed so they are negligible at the box boundary.
    Evaluation runs one 3-D slab at a time to bound memory.
    """
    ax = grid.axis()
    wt = grid.weights()
    rest = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    wrest = np.einsum("i,j,k->ijk", wt, wt, wt).ravel()
    total = 0j
    for x1, w1 in zip(ax, wt):
        pts = np.column_stack([np.full(rest.shape[0], x1), rest])
        vv, ww = evaluate_fields([v, w], pts)
        total += w1 * np.sum(wrest * np.einsum("nk,nk->n", np.conj(ww), vv))
    return complex(total)


def norm_l2(v: MatrixField, grid: QuadratureGrid = QuadratureGrid()) -> float:
    return float(np.sqrt(max(inner_product(v, v, grid).real, 0.0)))
