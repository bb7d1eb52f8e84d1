"""The 4x4 Dirac operator ``D = [[L, m I], [m I, Adj L]]`` on bispinor half-densities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .em_adjugate import adjugate_operator
from .errors import NegativeMass, SingularJacobian, SingularMetric
from .fields import NDIM, MatrixField, absolute, add, as_points, coords, evaluate_fields, exp, mul, power, substitute_affine
from .geometry import Metric
from .symbol_core import FirstOrderOperator, apply_operator, eval_principal, operator_from_symbols, standard_points


@dataclass(frozen=True, eq=False)
class DiracOperator:
    L: FirstOrderOperator
    AdjL: FirstOrderOperator
    m: float


def build_dirac(op: FirstOrderOperator, m: float) -> DiracOperator:
    if m < 0:
        raise NegativeMass(f"mass must be non-negative, got {m}")
    return DiracOperator(op, adjugate_operator(op), float(m))


def bispinor(v1, v2, w1, w2) -> MatrixField:
    return MatrixField([v1, v2, w1, w2])


def plane_wave(u, p) -> MatrixField:
    """``u e^{i p.x}`` for a constant column ``u`` and covector ``p``."""
    x = coords()
    phase = exp(add(*(mul(1j * float(p[a]), x[a]) for a in range(NDIM))))
    return MatrixField([mul(complex(c), phase) for c in np.asarray(u, dtype=complex)])


def apply_dirac(D: DiracOperator, psi: MatrixField, x) -> np.ndarray:
    """``(D psi)(x)``; top block ``L v + m w``, bottom ``m v + Adj L w``."""
    if psi.shape != (4,):
        raise ValueError("Dirac operator acts on 4-columns")
    pts, single = as_points(x)
    v, w = psi[0:2], psi[2:4]
    vv, ww = evaluate_fields([v, w], pts)
    top = apply_operator(D.L, v, pts) + D.m * ww
    bottom = D.m * vv + apply_operator(D.AdjL, w, pts)
    out = np.concatenate([top, bottom], axis=1)
    return out[0] if single else out


def full_symbol(D: DiracOperator, x, p) -> np.ndarray:
    """``[[L_prin + L_sub, m I], [m I, AdjL_prin + AdjL_sub]]`` at ``(x, p)``.

    For constant coefficients this is exactly the action on ``u e^{i p.x}``.
    """
    pts, single = as_points(x)
    top = eval_principal(D.L, pts, p) + D.L.S(pts)
    bot = eval_principal(D.AdjL, pts, p) + D.AdjL.S(pts)
    n = pts.shape[0]
    out = np.zeros((n, 4, 4), dtype=complex)
    out[:, :2, :2] = top
    out[:, 2:, 2:] = bot
    out[:, :2, 2:] = D.m * np.eye(2)
    out[:, 2:, :2] = D.m * np.eye(2)
    return out[0] if single else out


def mass_shell_residual(D: DiracOperator, p, x=(0.0, 0.0, 0.0, 0.0)) -> float:
    """``|det full_symbol(x, p)|``; vanishes on the mass shell ``-g^{ab} p_a p_b = m^2``."""
    return float(abs(np.linalg.det(full_symbol(D, x, p))))


def null_vector(D: DiracOperator, p, x=(0.0, 0.0, 0.0, 0.0)) -> tuple:
    """Right singular vector of the smallest singular value, and that value."""
    _, s, vh = np.linalg.svd(full_symbol(D, x, p))
    return vh[-1].conj(), float(s[-1] / max(s[0], 1e-300))


def rescale_half_density(psi: MatrixField, g: Metric, direction: str, points=None) -> MatrixField:
    """Convert between ``psi`` and ``psi_trad`` with ``psi = |det g_ab|^{1/4} psi_trad``.

    ``direction`` is ``"to_trad"`` (multiply by ``|det g_ab|^{-1/4}``) or
    ``"from_trad"`` (multiply by ``|det g_ab|^{1/4}``).
    """
    if direction not in ("to_trad", "from_trad"):
        raise ValueError("direction must be 'to_trad' or 'from_trad'")
    check_metric_nonsingular(g, standard_points() if points is None else points)
    # |det g_ab| = |det g^ab|^{-1}
    exponent = 0.25 if direction == "to_trad" else -0.25
    factor = power(absolute(g.det_up), exponent)
    return psi * factor


def check_metric_nonsingular(g: Metric, x, tol: float = 1e-12):
    d = np.abs(g.det_down_values(x))
    if np.any(~np.isfinite(d)) or np.any(d < tol):
        raise SingularMetric("metric determinant vanishes on the sample")


@dataclass(frozen=True)
class AffineMap:
    """``x' = J x + b``."""

    J: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if J.shape != (NDIM, NDIM) or b.shape != (NDIM,):
            raise ValueError("affine map needs a 4x4 Jacobian and a 4-vector offset")
        if abs(np.linalg.det(J)) < 1e-14:
            raise SingularJacobian("affine Jacobian is singular")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "b", b)

    @classmethod
    def dilation(cls, factor: float) -> "AffineMap":
        return cls(factor * np.eye(NDIM), np.zeros(NDIM))

    @property
    def jacobian_det(self) -> float:
        return float(np.linalg.det(self.J))

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.J.T + self.b

    def inverse(self, xp) -> np.ndarray:
        return np.linalg.solve(self.J, (np.asarray(xp, dtype=float) - self.b).T).T

    def pull(self, f):
        """Compose a field with ``phi^{-1}``: returns ``f(phi^{-1} x')`` in primed coordinates."""
        Ainv = np.linalg.inv(self.J)
        c = -Ainv @ self.b
        if isinstance(f, MatrixField):
            memo = {}
            return f.map(lambda e: substitute_affine(e, Ainv, c, memo))
        return substitute_affine(f, Ainv, c)


def coordinate_pushforward(op: FirstOrderOperator, phi: AffineMap) -> FirstOrderOperator:
    """The operator in coordinates ``x' = phi(x)`` acting on half-densities.

    Principal coefficients transform as a vector, ``E'^b = J^b_a E^a``; the
    subprincipal symbol is a scalar.  With ``v'(x') = |det J|^{-1/2}
    v(phi^{-1} x')`` one has ``L' v' = |det J|^{-1/2} (L v) o phi^{-1}``.
    """
    E = [phi.pull(e) for e in op.E]
    E_new = []
    for b in range(NDIM):
        acc = MatrixField.zeros((2, 2))
        for a in range(NDIM):
            if phi.J[b, a] != 0:
                acc = acc + E[a] * float(phi.J[b, a])
        E_new.append(acc)
    return operator_from_symbols(E_new, phi.pull(op.S), validate=False)


def pushforward_half_density(v: MatrixField, phi: AffineMap) -> MatrixField:
    """``v'(x') = |det J|^{-1/2} v(phi^{-1} x')``."""
    return phi.pull(v) * (abs(phi.jacobian_det) ** -0.5)


def pushforward_metric_values(g: Metric, phi: AffineMap, xp) -> np.ndarray:
    """Tensor-transformed ``J g^{ab}(phi^{-1} x') J^T`` at primed points."""
    pts, _ = as_points(xp)
    G = g.up(phi.inverse(pts))
    return np.einsum("ia,nab,jb->nij", phi.J, G, phi.J)



def mass_shell_p4(g_up: np.ndarray, p_spatial, m: float) -> np.ndarray:
    """Both roots p_4 of ``-g^{ab} p_a p_b = m^2`` for a constant metric and given (p_1, p_2, p_3)."""
    g = np.asarray(g_up, dtype=float)
    q = np.asarray(p_spatial, dtype=float)
    a = g[3, 3]
    b = 2.0 * g[3, :3] @ q
    c = q @ g[:3, :3] @ q + m * m
    disc = b * b - 4 * a * c
    if disc < 0:
        raise ValueError("no real mass-shell momentum for this spatial covector")
    r = np.sqrt(disc)
    return np.array([(-b + r) / (2 * a), (-b - r) / (2 * a)])


def is_constant_coefficient(op: FirstOrderOperator) -> bool:
    """True when every principal coefficient and the subprincipal symbol is symbolically constant."""
    for f in list(op.E) + [op.S]:
        for a in range(NDIM):
            if not all(e.is_zero for e in f.diff(a).flat()):
                return False
    return True
