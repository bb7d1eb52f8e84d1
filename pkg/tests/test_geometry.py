import numpy as np
import pytest
from numpy.testing import assert_allclose

from symcalc.errors import NearDegenerate, OrthonormalityViolation, WrongSignature
from symcalc.geometry import (
    Frame,
    Metric,
    check_lorentzian,
    check_metric_invertible,
    check_orthonormality,
    det4,
    evaluate_geometry,
    extract_frame,
    extract_metric,
    inverse4,
    metric_from_frame_values,
)
from symcalc.harness.catalog import conformal, flat_weyl, random_operator, rotating_frame, scaled_time
from symcalc.symbol_core import ETA, eval_principal

FLAT = np.diag([1.0, 1.0, 1.0, -1.0])


def metric_oracle(op, x, rng, n=30):
    """Least-squares fit of the quadratic form ``-det L_prin(x, p)`` over random p."""
    ps = rng.normal(size=(n, 4))
    q = -np.linalg.det(eval_principal(op, np.broadcast_to(x, (n, 4)), ps)).real
    iu = np.triu_indices(4)
    A = np.stack([ps[:, i] * ps[:, j] * (1.0 if i == j else 2.0) for i, j in zip(*iu)], axis=1)
    coef = np.linalg.lstsq(A, q, rcond=None)[0]
    G = np.zeros((4, 4))
    G[iu] = coef
    return G + np.triu(G, 1).T


class TestExtractMetric:
    def test_flat(self):
        assert_allclose(extract_metric(flat_weyl()).up(np.zeros(4)), FLAT)

    def test_conformal(self):
        assert_allclose(extract_metric(conformal(omega=2.0)).up(np.zeros(4)), 4 * FLAT)

    def test_rotating_frame_flat_everywhere(self, points):
        G = extract_metric(rotating_frame()).up(points)
        assert_allclose(G, np.broadcast_to(FLAT, G.shape), atol=1e-14)

    @pytest.mark.parametrize("make", [scaled_time, rotating_frame, lambda: random_operator(3)])
    def test_matches_least_squares_oracle(self, make, rng):
        op = make()
        g = extract_metric(op)
        for x in rng.uniform(-1, 1, (5, 4)):
            assert_allclose(g.up(x), metric_oracle(op, x, rng), atol=1e-12)

    def test_down_and_determinants(self, points):
        g = extract_metric(scaled_time())
        up, down = g.up(points), g.down(points)
        assert_allclose(up @ down, np.broadcast_to(np.eye(4), up.shape), atol=1e-12)
        assert_allclose(g.g_down(points).real, down, atol=1e-12)
        assert_allclose(g.det_down_values(points), np.linalg.det(down), rtol=1e-12)
        assert_allclose(g.det_down(points).real, np.linalg.det(down), rtol=1e-12)


def test_det4_and_inverse4(rng):
    M = rng.normal(size=(8, 4, 4))
    assert_allclose(det4(M), np.linalg.det(M), rtol=1e-12)
    assert_allclose(inverse4(M), np.linalg.inv(M), rtol=1e-10, atol=1e-12)


class TestLorentzian:
    def test_flat(self):
        g = extract_metric(flat_weyl())
        assert check_lorentzian(g).passed
        assert_allclose(np.sort(np.linalg.eigvalsh(g.up(np.zeros(4)))), [-1, 1, 1, 1])

    def test_euclidean_impostor(self):
        with pytest.raises(WrongSignature):
            check_lorentzian(Metric.constant(np.eye(4)))

    def test_two_negative(self):
        with pytest.raises(WrongSignature):
            check_lorentzian(Metric.constant(np.diag([1.0, 1.0, -1.0, -1.0])))

    def test_near_degenerate(self):
        with pytest.raises(NearDegenerate):
            check_lorentzian(Metric.constant(np.diag([1.0, 1.0, 1e-12, -1.0])))

    def test_scaled_time_all_points(self, points):
        rep = check_lorentzian(extract_metric(scaled_time()), points)
        assert rep.passed and rep.max_residual > 1e-8

    def test_invertible(self):
        assert check_metric_invertible(extract_metric(flat_weyl())).passed


class TestFrame:
    def test_flat(self):
        assert_allclose(extract_frame(flat_weyl())(np.zeros(4)), np.eye(4))

    def test_conformal(self):
        assert_allclose(extract_frame(conformal(omega=2.0))(np.zeros(4)), 2 * np.eye(4))

    def test_rotating_rows(self, points):
        e = extract_frame(rotating_frame())(points)
        th = points[:, 3]
        assert_allclose(e[:, 0, :], np.stack([np.cos(th), -np.sin(th), 0 * th, 0 * th], axis=1), atol=1e-15)
        assert_allclose(e[:, 1, :], np.stack([np.sin(th), np.cos(th), 0 * th, 0 * th], axis=1), atol=1e-15)

    def test_frame_reconstructs_metric(self, points):
        op = random_operator(5)
        geo = evaluate_geometry(op, points)
        assert_allclose(metric_from_frame_values(geo["frame"]), geo["g_up"], atol=1e-12)

    def test_imaginary_frame_rejected(self):
        from symcalc.fields import MatrixField

        with pytest.raises(ValueError):
            Frame(MatrixField.constant(1j * np.eye(4)))(np.zeros(4))


class TestOrthonormality:
    def test_flat_exact(self):
        op = flat_weyl()
        rep = check_orthonormality(extract_frame(op), extract_metric(op))
        assert rep.max_residual == 0.0

    def test_conformal(self):
        op = conformal(omega=2.0)
        assert check_orthonormality(extract_frame(op), extract_metric(op)).passed

    def test_gauged_flat(self, core_ops, points):
        op = core_ops["gauged-flat"]
        assert check_orthonormality(extract_frame(op), extract_metric(op), points, tol=1e-9).passed

    def test_wrong_metric_detected(self):
        op = flat_weyl()
        with pytest.raises(OrthonormalityViolation) as info:
            check_orthonormality(extract_frame(op), Metric.constant(np.diag([1.0, 1.0, 2.0, -1.0])))
        assert info.value.location[1:] == (3, 3)

    def test_eta(self):
        assert_allclose(ETA, FLAT)
