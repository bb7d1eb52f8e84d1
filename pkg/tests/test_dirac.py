import numpy as np
import pytest
from numpy.testing import assert_allclose

from symcalc.dirac import (
    AffineMap,
    apply_dirac,
    bispinor,
    build_dirac,
    coordinate_pushforward,
    full_symbol,
    is_constant_coefficient,
    mass_shell_p4,
    mass_shell_residual,
    null_vector,
    plane_wave,
    pushforward_half_density,
    pushforward_metric_values,
    rescale_half_density,
)
from symcalc.em_adjugate import adjugate_operator
from symcalc.errors import NegativeMass, SingularJacobian, SingularMetric
from symcalc.fields import coords, cos, evaluate_fields, exp, mul, sin
from symcalc.geometry import Metric, extract_metric
from symcalc.harness.catalog import conformal, flat_weyl, rotating_frame, scaled_time
from symcalc.harness.oracles import fd_gradient_batch
from symcalc.symbol_core import PAULI, apply_operator, eval_principal

x1, x2, x3, x4 = coords()
FLAT = np.diag([1.0, 1.0, 1.0, -1.0])


def _psi():
    return bispinor(sin(x1) * exp(mul(0.3j, x4)), cos(x2 + x3), x1 * x4 + 1.0, exp(mul(-0.2j, x2)) * x3)


class TestBuild:
    def test_negative_mass(self):
        with pytest.raises(NegativeMass):
            build_dirac(flat_weyl(), -0.1)

    def test_massless_block_diagonal(self, points):
        D = build_dirac(flat_weyl(), 0.0)
        psi = bispinor(x1, x2 * x3, 0.0, 0.0)
        out = apply_dirac(D, psi, points)
        assert_allclose(out[:, 2:], 0.0)
        assert_allclose(out[:, :2], apply_operator(D.L, psi[0:2], points))

    def test_constant_massless_annihilated(self, points):
        D = build_dirac(flat_weyl(), 0.0)
        assert_allclose(apply_dirac(D, bispinor(1.0, 2.0, 3j, 4.0), points), 0.0)

    def test_mass_blocks(self):
        D = build_dirac(flat_weyl(), 1.0)
        psi = bispinor(1.0, 0.0, 0.0, 0.0)
        assert_allclose(apply_dirac(D, psi, np.zeros(4)), [0, 0, 1, 0])

    def test_curved_apply_matches_fd(self, rng):
        D = build_dirac(scaled_time(), 0.5)
        psi = _psi()
        xs = rng.uniform(-1, 1, (20, 4))
        grads = fd_gradient_batch([psi], xs)[0]
        vals = evaluate_fields(list(D.L.F) + [D.L.G] + list(D.AdjL.F) + [D.AdjL.G, psi], xs)
        p = vals[10]
        top = np.einsum("nkl,nl->nk", vals[4], p[:, :2]) + 0.5 * p[:, 2:]
        bot = np.einsum("nkl,nl->nk", vals[9], p[:, 2:]) + 0.5 * p[:, :2]
        for a in range(4):
            top = top + np.einsum("nkl,nl->nk", vals[a], grads[a][:, :2])
            bot = bot + np.einsum("nkl,nl->nk", vals[5 + a], grads[a][:, 2:])
        assert_allclose(apply_dirac(D, psi, xs), np.concatenate([top, bot], axis=1), atol=1e-6)


class TestFullSymbol:
    def test_massless_time(self):
        D = build_dirac(flat_weyl(), 0.0)
        assert_allclose(full_symbol(D, np.zeros(4), [0, 0, 0, 1]), np.eye(4))

    def test_zero_momentum(self):
        D = build_dirac(flat_weyl(), 1.0)
        assert_allclose(full_symbol(D, np.zeros(4), np.zeros(4)), [[0, 0, 1, 0], [0, 0, 0, 1],
                                                                    [1, 0, 0, 0], [0, 1, 0, 0]])

    def test_determinant_identity(self, rng):
        D = build_dirac(flat_weyl(), 1.3)
        for p in rng.normal(size=(100, 4)):
            det_p = np.linalg.det(eval_principal(D.L, np.zeros(4), p))
            assert_allclose(np.linalg.det(full_symbol(D, np.zeros(4), p)), (det_p - 1.69) ** 2, rtol=1e-10, atol=1e-10)

    def test_plane_wave_action(self, points):
        D = build_dirac(flat_weyl(sub=(0.1, 0, 0.2, 0.3)), 0.7)
        p = np.array([0.3, -0.5, 1.1, 0.4])
        u = np.array([1.0, 0.5j, -0.2, 0.3])
        got = apply_dirac(D, plane_wave(u, p), points)
        expect = (full_symbol(D, np.zeros(4), p) @ u)[None, :] * np.exp(1j * points @ p)[:, None]
        assert_allclose(got, expect, atol=1e-13)


class TestMassShell:
    def test_on_shell(self):
        assert mass_shell_residual(build_dirac(flat_weyl(), 1.0), [0, 0, 0, 1]) < 1e-14

    def test_off_shell_value(self):
        assert_allclose(mass_shell_residual(build_dirac(flat_weyl(), 1.0), [0, 0, 0, 2]), 9.0)

    def test_light_cone(self):
        assert mass_shell_residual(build_dirac(flat_weyl(), 0.0), [1, 0, 0, 1]) < 1e-14

    def test_p4_roots(self):
        q = np.array([0.3, -0.4, 1.2])
        roots = mass_shell_p4(FLAT, q, 1.0)
        assert_allclose(sorted(roots), [-np.sqrt(1 + q @ q), np.sqrt(1 + q @ q)])

    def test_null_vector_solves(self, points):
        D = build_dirac(flat_weyl(), 1.0)
        q = np.array([0.2, 0.7, -0.5])
        p = np.append(q, mass_shell_p4(FLAT, q, 1.0)[1])
        u, s = null_vector(D, p)
        assert s < 1e-12
        assert np.abs(apply_dirac(D, plane_wave(u, p), points)).max() < 1e-12


class TestRescale:
    def test_flat_identity(self, points):
        g = extract_metric(flat_weyl())
        psi = _psi()
        assert_allclose(rescale_half_density(psi, g, "to_trad")(points), psi(points), atol=1e-15)

    def test_conformal_factor(self):
        g = extract_metric(conformal(omega=2.0))
        assert_allclose(abs(g.det_down_values(np.zeros(4))), 1 / 256)
        psi = bispinor(1.0, 0.0, 0.0, 0.0)
        assert_allclose(rescale_half_density(psi, g, "from_trad")(np.zeros(4))[0], 0.25)
        assert_allclose(rescale_half_density(psi, g, "to_trad")(np.zeros(4))[0], 4.0)

    def test_round_trip(self, points):
        g = extract_metric(conformal(omega=1.0, beta=0.7))
        psi = _psi()
        back = rescale_half_density(rescale_half_density(psi, g, "to_trad"), g, "from_trad")
        assert_allclose(back(points), psi(points), rtol=1e-12, atol=1e-14)

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            rescale_half_density(_psi(), extract_metric(flat_weyl()), "sideways")

    def test_singular_metric(self):
        with pytest.raises(SingularMetric):
            rescale_half_density(_psi(), Metric.constant(np.diag([1.0, 1.0, 0.0, -1.0])), "to_trad")


class TestPushforward:
    def test_identity_map(self, points):
        op = scaled_time()
        phi = AffineMap(np.eye(4), np.zeros(4))
        out = coordinate_pushforward(op, phi)
        for a in range(4):
            assert_allclose(out.E[a](points), op.E[a](points), atol=1e-15)
        assert_allclose(out.S(points), op.S(points), atol=1e-15)

    def test_singular_jacobian(self):
        with pytest.raises(SingularJacobian):
            AffineMap(np.zeros((4, 4)), np.zeros(4))

    def test_dilation_scales_principal(self, points):
        out = coordinate_pushforward(flat_weyl(), AffineMap.dilation(2.0))
        for a in range(4):
            assert_allclose(out.E[a](points), 2 * np.broadcast_to(PAULI[a], (101, 2, 2)))

    def test_metric_tensorial(self, points):
        phi = AffineMap(np.array([[2.0, 0.3, 0, 0], [0, 1.0, 0, 0], [0, 0, 0.5, 0.1], [0.2, 0, 0, 1.5]]),
                        np.array([0.1, 0.0, -0.3, 0.2]))
        op = scaled_time()
        xp = phi(points)
        new = extract_metric(coordinate_pushforward(op, phi)).up(xp)
        assert_allclose(new, pushforward_metric_values(extract_metric(op), phi, xp), atol=1e-10)

    def test_half_density_law(self, points):
        phi = AffineMap.dilation(2.0)
        op = rotating_frame()
        v = _psi()[0:2]
        lhs = apply_operator(coordinate_pushforward(op, phi), pushforward_half_density(v, phi), phi(points))
        rhs = 0.25 * apply_operator(op, v, points)
        assert_allclose(lhs, rhs, atol=1e-12)

    def test_plane_wave_solution_maps_to_half_momentum(self, points):
        phi = AffineMap.dilation(2.0)
        D = build_dirac(flat_weyl(), 1.0)
        q = np.array([0.5, -0.3, 0.9])
        p = np.append(q, mass_shell_p4(FLAT, q, 1.0)[0])
        u, _ = null_vector(D, p)
        pushed = pushforward_half_density(plane_wave(u, p), phi)
        xp = phi(points)
        assert_allclose(pushed(xp), 0.25 * plane_wave(u, p / 2)(xp), atol=1e-14)
        D2 = build_dirac(coordinate_pushforward(flat_weyl(), phi), 1.0)
        assert np.abs(apply_dirac(D2, pushed, xp)).max() < 1e-9

    def test_adjugation_commutes(self, points):
        phi = AffineMap.dilation(2.0)
        op = scaled_time()
        a = adjugate_operator(coordinate_pushforward(op, phi))
        b = coordinate_pushforward(adjugate_operator(op), phi)
        xp = phi(points)
        assert_allclose(a.S(xp), b.S(xp), atol=1e-12)


def test_constant_coefficient_detection():
    assert is_constant_coefficient(flat_weyl(sub=(1, 0, 0, 0)))
    assert not is_constant_coefficient(rotating_frame())
