import math

import numpy as np
import pytest

from conefix.errors import LayoutMismatchError
from conefix.ordered_space import (
    CandidateSet,
    OrderCone,
    SpaceElement,
    estimate_normal_constant,
    in_cone,
    leq,
    nonneg_grid,
    norm,
    orthant,
    snap_zero,
    strictly_less,
    verify_cone_axioms,
    zeros_like,
)


def el(*values):
    return SpaceElement.finite(values)


class TestSpaceElement:
    def test_rejects_nonfinite_coordinates(self):
        with pytest.raises(ValueError):
            el(1.0, float("nan"))
        with pytest.raises(ValueError):
            el(float("inf"), 0.0)

    def test_layout_mismatch_on_arithmetic(self):
        with pytest.raises(LayoutMismatchError):
            el(1.0, 2.0) + SpaceElement.grid([1.0, 2.0])
        with pytest.raises(LayoutMismatchError):
            el(1.0) - el(1.0, 2.0)

    def test_arithmetic(self):
        a, b = el(1.0, 2.0), el(3.0, 5.0)
        assert (a + b).coords == (4.0, 7.0)
        assert (b - a).coords == (2.0, 3.0)
        assert (2.0 * a).coords == (2.0, 4.0)
        assert (-a).coords == (-1.0, -2.0)

    def test_snap_zero(self):
        v = el(1e-13, -1e-13, 0.5)
        assert snap_zero(v).coords == (0.0, 0.0, 0.5)


class TestMembershipAndOrder:
    def test_zero_in_orthant(self):
        assert in_cone(el(0.0, 0.0), orthant(2))

    def test_negative_coordinate_excluded(self):
        assert not in_cone(el(1.0, -1.0), orthant(2))

    def test_grid_exponential_samples_in_cone(self):
        grid = np.exp(np.linspace(0.0, 1.0, 33))
        assert in_cone(SpaceElement.grid(grid), nonneg_grid(33))

    def test_membership_is_exact(self):
        assert not in_cone(el(-1e-15, 0.0), orthant(2))

    def test_layout_mismatch(self):
        with pytest.raises(LayoutMismatchError):
            in_cone(el(1.0, 2.0, 3.0), orthant(2))

    def test_leq_examples(self):
        c = orthant(2)
        assert leq(el(1.0, 2.0), el(2.0, 3.0), c)
        assert not leq(el(1.0, 2.0), el(2.0, 1.0), c)

    def test_strictly_less_examples(self):
        c = orthant(2)
        assert strictly_less(el(0.0, 0.0), el(1.0, 1.0), c)
        assert not strictly_less(el(0.0, 0.0), el(0.0, 1.0), c)
        assert not strictly_less(el(1.0, 1.0), el(0.0, 0.0), c)

    def test_order_axioms_sampled(self):
        c = orthant(3)
        rng = np.random.default_rng(11)
        pts = rng.normal(size=(10_000, 3, 3))
        for row in pts:
            x, y, z = (el(*row[i]) for i in range(3))
            assert leq(x, x, c)  # reflexive
            if leq(x, y, c) and leq(y, x, c):
                assert x.coords == y.coords  # antisymmetric
            if leq(x, y, c) and leq(y, z, c):
                assert leq(x, z, c)  # transitive
            if strictly_less(x, y, c):
                assert leq(x, y, c)

    def test_cone_closed_under_nonneg_combinations(self):
        c = orthant(3)
        rng = np.random.default_rng(7)
        for _ in range(2000):
            x = el(*np.abs(rng.normal(size=3)))
            y = el(*np.abs(rng.normal(size=3)))
            a, b = rng.uniform(0.0, 3.0, 2)
            assert in_cone(a * x + b * y, c)


class TestNorms:
    def test_euclidean(self):
        assert norm(el(3.0, 4.0), orthant(2)) == 5.0

    def test_sup(self):
        assert norm(el(-3.0, 2.0), orthant(2, "sup")) == 3.0

    def test_skew_direct_evaluation(self):
        # |1 - 0| + 0.1 * |1 + 0| spelled out
        expected = abs(1.0 - 0.0) + 0.1 * abs(1.0 + 0.0)
        assert norm(el(1.0, 0.0), orthant(2, "skew", 0.1)) == expected == 1.1

    def test_zero(self):
        for cone in (orthant(2), orthant(2, "sup"), orthant(2, "skew", 0.1)):
            assert norm(zeros_like(cone.layout), cone) == 0.0

    def test_skew_requires_dimension_two(self):
        with pytest.raises(ValueError):
            OrderCone("orthant", 3, "skew", 0.1)

    def test_norm_axioms_sampled(self):
        rng = np.random.default_rng(3)
        cones = [orthant(2), orthant(2, "sup"), orthant(2, "skew", 0.25), nonneg_grid(9)]
        for cone in cones:
            d = cone.dim
            for _ in range(500):
                u = rng.normal(size=d)
                v = rng.normal(size=d)
                lam = rng.normal()
                eu = SpaceElement(tuple(u), cone.layout)
                ev = SpaceElement(tuple(v), cone.layout)
                nu, nv = norm(eu, cone), norm(ev, cone)
                assert nu >= 0.0
                assert norm(lam * eu, cone) == pytest.approx(abs(lam) * nu, rel=1e-12)
                assert norm(eu + ev, cone) <= (nu + nv) * (1 + 1e-12)
            assert norm(zeros_like(cone.layout), cone) == 0.0


def _oracle_max_ratio(cone, n_pairs, seed):
    """Independent brute force: x = u .* y with u in [0,1], so 0 <= x <= y."""
    rng = np.random.default_rng(seed)
    d = cone.dim
    best = 0.0
    for _ in range(n_pairs // 100_000 or 1):
        y = rng.random((100_000, d)) * 3.0
        x = y * rng.random((100_000, d))
        if cone.norm_tag == "euclidean":
            nx, ny = np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1)
        elif cone.norm_tag == "sup":
            nx, ny = np.abs(x).max(axis=1), np.abs(y).max(axis=1)
        else:
            nx = np.abs(x[:, 0] - x[:, 1]) + cone.skew_eps * np.abs(x[:, 0] + x[:, 1])
            ny = np.abs(y[:, 0] - y[:, 1]) + cone.skew_eps * np.abs(y[:, 0] + y[:, 1])
        mask = ny > 0
        best = max(best, float((nx[mask] / ny[mask]).max()))
    return best


class TestNormalConstant:
    def test_euclidean_orthant_is_one(self):
        # Oracle: brute-force maximization never exceeds 1 for a monotone norm.
        assert _oracle_max_ratio(orthant(2), 1_000_000, 5) <= 1.0 + 1e-12
        k = estimate_normal_constant(orthant(2), 100_000, seed=1)
        assert abs(k - 1.0) <= 1e-12

    def test_sup_orthant_is_one(self):
        assert _oracle_max_ratio(orthant(2, "sup"), 1_000_000, 6) <= 1.0 + 1e-12
        k = estimate_normal_constant(orthant(2, "sup"), 100_000, seed=2)
        assert abs(k - 1.0) <= 1e-12

    def test_skew_exceeds_five_and_a_half(self):
        # witness x=(1,0), y=(1,1): N(x)=1.1, N(y)=0.2, ratio 5.5
        nx = abs(1.0 - 0.0) + 0.1 * abs(1.0 + 0.0)
        ny = abs(1.0 - 1.0) + 0.1 * abs(1.0 + 1.0)
        assert nx / ny == 5.5
        k = estimate_normal_constant(orthant(2, "skew", 0.1), 100_000, seed=3)
        assert k >= 5.5

    def test_deterministic_given_seed(self):
        a = estimate_normal_constant(orthant(2, "skew", 0.3), 50_000, seed=9)
        b = estimate_normal_constant(orthant(2, "skew", 0.3), 50_000, seed=9)
        assert a == b

    def test_lower_bound_semantics(self):
        # more samples can only raise the estimate
        small = estimate_normal_constant(orthant(2, "skew", 0.2), 1_000, seed=4)
        big = estimate_normal_constant(orthant(2, "skew", 0.2), 50_000, seed=4)
        assert big >= small

    def test_grid_cone_sup_is_one(self):
        k = estimate_normal_constant(nonneg_grid(33), 20_000, seed=8)
        assert abs(k - 1.0) <= 1e-12


class TestConeAxioms:
    def test_orthant_passes(self):
        report = verify_cone_axioms(orthant(2), n_samples=10_000, seed=0)
        assert report.all_passed

    def test_grid_cone_passes(self):
        report = verify_cone_axioms(nonneg_grid(33), n_samples=10_000, seed=0)
        assert report.all_passed

    def test_shifted_halfplane_fails_scaling(self):
        bad = CandidateSet(2, lambda v: v[0] >= 1.0, label="v1>=1")
        report = verify_cone_axioms(bad, n_samples=5_000, seed=0)
        assert not report.p2.passed
        w = report.p2.witness
        combo = np.array(w["combination"])
        assert combo[0] < 1.0  # the combination really left the set

    def test_quadrant_union_fails_antisymmetry(self):
        bad = CandidateSet(2, lambda v: v[0] * v[1] >= 0.0, label="v1*v2>=0")
        report = verify_cone_axioms(bad, n_samples=5_000, seed=0)
        assert not report.p3.passed
        w = report.p3.witness
        x = np.array(w["x"])
        assert (x != 0).any()
        assert x[0] * x[1] >= 0 and (-x)[0] * (-x)[1] >= 0
