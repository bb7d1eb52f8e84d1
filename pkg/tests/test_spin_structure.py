import numpy as np
import pytest
from numpy.testing import assert_allclose

from symcalc.em_adjugate import adjugate_operator
from symcalc.errors import MetricMismatch, NotInPositiveClass, WitnessFails
from symcalc.gauge import GaugeMap, apply_gauge, catalog_gauges, random_gauge
from symcalc.geometry import extract_frame, extract_metric
from symcalc.harness.catalog import conformal, flat_weyl, random_operator, rotating_frame
from symcalc.spin_structure import (
    ClassificationTag,
    ReferencePair,
    check_equivalence_witness,
    chi_c,
    chi_c_contraction,
    chi_t,
    classify,
)


def chi_oracle(ref_op, op, x):
    """``c`` and ``t`` straight from numpy inverses and determinants."""
    g_dn = np.linalg.inv(extract_metric(ref_op).up(x))
    e_ref = extract_frame(ref_op)(x)
    e = extract_frame(op)(x)
    c = -np.linalg.det(e_ref @ g_dn) * np.linalg.det(e)
    t = -e_ref[3] @ g_dn @ e[3]
    return c, t


@pytest.fixture(scope="module")
def ref():
    return ReferencePair(rotating_frame())


class TestChi:
    def test_self(self, ref, points):
        assert_allclose(chi_c(ref, ref.op, points), 1.0, atol=1e-12)
        assert_allclose(chi_t(ref, ref.op, points), 1.0, atol=1e-12)

    def test_sign_table(self, ref, points):
        op = ref.op
        adj = adjugate_operator(op)
        assert_allclose(chi_c(ref, adj, points), -1.0, atol=1e-12)
        assert_allclose(chi_t(ref, -op, points), -1.0, atol=1e-12)
        assert_allclose(chi_t(ref, adj, points), 1.0, atol=1e-12)
        assert_allclose(chi_c(ref, -op, points), 1.0, atol=1e-12)

    def test_gauge_preserves_orientation(self, ref, points):
        for R in catalog_gauges().values():
            assert_allclose(chi_c(ref, apply_gauge(ref.op, R), points), 1.0, atol=1e-9)

    def test_oracle(self, rng):
        refop = random_operator(8)
        ref = ReferencePair(refop)
        op = apply_gauge(refop, random_gauge(rng))
        for x in rng.uniform(-1, 1, (5, 4)):
            c, t = chi_oracle(refop, op, x)
            assert_allclose(chi_c(ref, op, x), c, atol=1e-12)
            assert_allclose(chi_t(ref, op, x), t, atol=1e-12)

    def test_dual_path(self, ref, points):
        for op in (ref.op, -ref.op, adjugate_operator(ref.op)):
            assert_allclose(chi_c_contraction(ref, op, points[::10]), chi_c(ref, op, points[::10]), atol=1e-12)

    def test_metric_mismatch(self, ref):
        with pytest.raises(MetricMismatch):
            chi_c(ref, conformal(omega=2.0), np.zeros(4))


class TestClassify:
    def test_four_classes(self, ref):
        adj = adjugate_operator(ref.op)
        tags = [classify(ref, op).as_tuple() for op in (ref.op, -ref.op, adj, -adj)]
        assert tags == [(1, 1), (1, -1), (-1, 1), (-1, -1)]

    def test_flat_reference_for_rotating_frame(self):
        tag = classify(ReferencePair(flat_weyl()), rotating_frame())
        assert tag == ClassificationTag(1, 1)

    def test_tag_validation(self):
        with pytest.raises(ValueError):
            ClassificationTag(0, 1)


class TestWitness:
    def test_by_construction(self, rng, points):
        op = rotating_frame()
        R = random_gauge(rng)
        assert check_equivalence_witness(op, apply_gauge(op, R), R, points).max_residual < 1e-12

    def test_identity(self):
        op = rotating_frame()
        assert check_equivalence_witness(op, op, GaugeMap.identity()).max_residual == 0.0

    def test_wrong_witness(self, rng):
        op = rotating_frame()
        R = random_gauge(rng)
        wrong = random_gauge(rng)
        with pytest.raises(WitnessFails) as info:
            check_equivalence_witness(op, apply_gauge(op, R), wrong)
        assert info.value.residual > 1e-3

    def test_negative_class_refused(self):
        op = rotating_frame()
        with pytest.raises(NotInPositiveClass):
            check_equivalence_witness(op, -op, GaugeMap.identity())
