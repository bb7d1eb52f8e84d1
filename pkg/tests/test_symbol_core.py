import numpy as np
import pytest
from numpy.testing import assert_allclose

from symcalc.errors import DegeneratePrincipalSymbol, NonHermitianSymbol
from symcalc.fields import MatrixField, coords, cos, exp, mul, sin
from symcalc.harness.catalog import conformal, degenerate, flat_weyl, scaled_time
from symcalc.harness.oracles import fd_gradient_batch
from symcalc.symbol_core import (
    PAULI,
    QuadratureGrid,
    applied_field,
    apply_operator,
    assemble_operator,
    check_nondegeneracy,
    eval_principal,
    gaussian_window,
    inner_product,
    is_hermitian,
    momentum_sample,
    norm_l2,
    operator_from_symbols,
    pauli_coefficients,
    pauli_expand,
    standard_points,
    two_column,
)

x1, x2, x3, x4 = coords()


def _values(op, pts):
    return np.stack([f(pts) for f in op.F] + [op.G(pts)], axis=1)


class TestPauli:
    def test_basis_is_hermitian_and_trace_orthogonal(self):
        for j in range(4):
            assert is_hermitian(PAULI[j])
            for k in range(4):
                assert_allclose(np.trace(PAULI[j] @ PAULI[k]), 2.0 * (j == k))

    def test_expand_round_trip(self, rng):
        c = rng.normal(size=(10, 4))
        assert_allclose(pauli_coefficients(pauli_expand(c)), c, atol=1e-15)


class TestSamples:
    def test_standard_points(self):
        pts = standard_points()
        assert pts.shape == (101, 4)
        assert_allclose(pts, standard_points())
        assert np.all(np.abs(pts) <= 1.0)

    def test_momentum_sample_unit_and_deterministic(self):
        P = momentum_sample(64)
        assert P.shape == (72, 4)
        assert_allclose(np.linalg.norm(P, axis=1), 1.0)
        assert_allclose(P, momentum_sample(64))
        assert_allclose(P[:4], np.eye(4))


class TestAssembly:
    def test_constant_flat(self):
        op = assemble_operator([-1j * PAULI[a] for a in range(4)], np.zeros((2, 2)))
        x = np.array([0.1, 0.2, 0.3, 0.4])
        for a in range(4):
            assert_allclose(op.E[a](x), PAULI[a])
        assert_allclose(op.S(x), 0.0)

    def test_constant_subprincipal_passthrough(self):
        op = assemble_operator([-1j * PAULI[a] for a in range(4)], 0.7 * PAULI[2])
        assert_allclose(op.S(np.zeros(4)), 0.7 * PAULI[2])

    def test_divergence_compensator(self, points):
        a = 1.0 + mul(0.1, sin(x1))
        F = [MatrixField.constant(-1j * PAULI[0]) * a] + [MatrixField.constant(-1j * PAULI[k]) for k in (1, 2, 3)]
        G = MatrixField.constant(-0.5j * PAULI[0]) * mul(0.1, cos(x1))
        op = assemble_operator(F, G)
        assert_allclose(op.S(points), 0.0, atol=1e-15)
        # divergence term against a finite-difference oracle
        E1 = op.E[0]
        fd = fd_gradient_batch([E1], points)[0][0]
        assert_allclose(0.5j * fd, -G(points), atol=1e-10)

    def test_round_trip(self, rng):
        op = scaled_time()
        again = operator_from_symbols(op.E, op.S)
        back = assemble_operator(again.F, again.G)
        pts = rng.uniform(-1, 1, (20, 4))
        assert_allclose(_values(back, pts), _values(op, pts), atol=1e-14)

    def test_conformal_lower_order_term(self, points):
        om = exp(x2)
        op = operator_from_symbols([MatrixField.constant(PAULI[a]) * om for a in range(4)], np.zeros((2, 2)))
        # G = -(i/2) sum_a dE^a/dx^a = -(i/2) e^{x2} s^2
        expect = -0.5j * np.exp(points[:, 1])[:, None, None] * PAULI[1]
        assert_allclose(op.G(points), expect, atol=1e-14)
        fd = fd_gradient_batch([op.E[1]], points)[0][1]
        assert_allclose(op.G(points), -0.5j * fd, atol=1e-9)

    def test_non_hermitian_rejected(self):
        E = [PAULI[0], PAULI[1], 1j * PAULI[2], PAULI[3]]
        with pytest.raises(NonHermitianSymbol):
            operator_from_symbols(E, np.zeros((2, 2)))

    def test_near_hermitian_symmetrized(self):
        E = [PAULI[a] for a in range(4)]
        S = np.array([[1.0, 1e-11j], [0.0, 1.0]])
        with pytest.warns(UserWarning):
            op = operator_from_symbols(E, S)
        assert is_hermitian(op.S(np.zeros(4)))

    def test_negation_and_scaling(self):
        op = scaled_time()
        x = np.array([0.3, 0.1, -0.2, 0.5])
        assert_allclose((-op).E[3](x), -op.E[3](x))
        assert_allclose((op * 2.0).S(x), 2.0 * op.S(x))


class TestPrincipal:
    def test_flat_examples(self):
        op = flat_weyl()
        assert_allclose(eval_principal(op, np.zeros(4), [0, 0, 0, 1]), np.eye(2))
        assert_allclose(eval_principal(op, np.zeros(4), [1, 0, 0, 0]), PAULI[0])
        assert_allclose(eval_principal(op, np.zeros(4), [3, -1, 2, 5]), [[7, 3 + 1j], [3 - 1j, 3]])

    def test_broadcast(self, rng):
        op = scaled_time()
        xs = rng.uniform(-1, 1, (6, 4))
        ps = rng.normal(size=(6, 4))
        batch = eval_principal(op, xs, ps)
        for n in range(6):
            assert_allclose(batch[n], eval_principal(op, xs[n], ps[n]))


class TestNondegeneracy:
    def test_flat_passes(self):
        rep = check_nondegeneracy(flat_weyl())
        assert rep.passed and rep.max_residual > 0.5

    def test_missing_spatial_terms_fail(self):
        with pytest.raises(DegeneratePrincipalSymbol) as info:
            check_nondegeneracy(degenerate())
        assert info.value.report.worst_point[4:] == [1.0, 0.0, 0.0, 0.0]

    def test_conformal_exponential_passes(self):
        assert check_nondegeneracy(conformal(omega=1.0, beta=1.0)).passed

    def test_small_sample_refused(self):
        with pytest.raises(ValueError):
            check_nondegeneracy(flat_weyl(), n_p=16)


class TestApply:
    def test_constant_column_annihilated(self):
        v = two_column(1.0, 0.0)
        assert_allclose(apply_operator(flat_weyl(), v, standard_points()), 0.0)

    def test_plane_wave_fourier_identity(self, points):
        op = flat_weyl()
        p = np.array([0.4, -1.2, 0.3, 0.9])
        u = np.array([0.6, 0.8j])
        phase = exp(sum(mul(1j * p[a], coords()[a]) for a in range(4)))
        v = two_column(mul(u[0], phase), mul(u[1], phase))
        got = apply_operator(op, v, points)
        # F^a d_a e^{ipx} = -i s^a (i p_a) e^{ipx} = L_prin(p) e^{ipx}
        expect = np.einsum("kl,l->k", eval_principal(op, np.zeros(4), p), u)[None, :] * np.exp(1j * points @ p)[:, None]
        assert_allclose(got, expect, atol=1e-13)

    def test_curved_matches_finite_differences(self, rng):
        op = scaled_time()
        v = two_column(sin(x1 + mul(0.5, x3)) * exp(mul(0.2j, x4)), cos(x2 * x4) + mul(1j, x1))
        pts = rng.uniform(-1, 1, (30, 4))
        grads = fd_gradient_batch([v], pts)[0]
        F = [f(pts) for f in op.F]
        fd = np.einsum("nkl,nl->nk", op.G(pts), v(pts))
        for a in range(4):
            fd = fd + np.einsum("nkl,nl->nk", F[a], grads[a])
        assert_allclose(apply_operator(op, v, pts), fd, rtol=1e-6, atol=1e-6)

    def test_applied_field_agrees(self, rng):
        op = scaled_time()
        v = two_column(sin(x1), x2 * x3)
        pts = rng.uniform(-1, 1, (5, 4))
        assert_allclose(applied_field(op, v)(pts), apply_operator(op, v, pts), atol=1e-14)


class TestInnerProduct:
    grid = QuadratureGrid(half_width=3.6, n=21)

    def test_window_mass(self):
        w = gaussian_window(0.6)
        v = two_column(w, 0.0)
        ip = inner_product(v, v, self.grid)
        # int exp(-|x|^2 / sigma^2) d^4x = (pi sigma^2)^2
        assert abs(ip.imag) < 1e-14
        assert_allclose(ip.real, (np.pi * 0.36) ** 2, rtol=1e-6)

    def test_orthogonal_columns(self):
        w = gaussian_window(0.6)
        assert abs(inner_product(two_column(w, 0.0), two_column(0.0, w * x1), self.grid)) < 1e-15

    def test_formal_self_adjointness_flat(self):
        op = flat_weyl()
        w0 = gaussian_window(0.6)
        v = two_column(w0 * exp(mul(0.7j, x1)), w0 * x2)
        w = two_column(w0 * cos(x3), w0 * exp(mul(-0.4j, x4)))
        lhs = inner_product(applied_field(op, v), w, self.grid)
        rhs = inner_product(v, applied_field(op, w), self.grid)
        assert abs(lhs - rhs) < 1e-6 * norm_l2(v, self.grid) * norm_l2(w, self.grid)
