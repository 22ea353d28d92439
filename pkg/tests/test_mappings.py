import math

import numpy as np
import pytest

from conefix.cone_metric import exp_space, product_space
from conefix.errors import DomainEscapeError, ValidationError
from conefix.mappings import (
    ALPHA_CONTRACTION,
    NO_EVIDENCE,
    NONEXPANSIVE,
    OUTSIDE_FAMILY,
    SUSPECT_NON_SUBSEQUENTIAL,
    IteratedMap,
    MapTriple,
    builtin_map,
    classify_family,
    estimate_tr_modulus,
    modulus_certificate_holds,
    pairwise_modulus,
    parse_map,
    probe_injectivity,
    probe_subsequential_convergence,
    probe_triple,
    sample_pairs,
)

PROD = product_space(alpha=1.0, domain=(-1e9, 1e9))
EXP33 = exp_space(33, domain=(-1e9, 1e9))


def triple(s, t, r):
    return MapTriple(parse_map(s), parse_map(t), parse_map(r))


class TestRealMap:
    def test_eval_and_call(self):
        m = parse_map("x+1")
        assert m(2.0) == 3.0
        assert m.eval(2.0) == 3.0

    def test_builtin_registry(self):
        m = builtin_map("exp-decay")
        assert m(0.0) == 1.0
        with pytest.raises(ValueError):
            builtin_map("no-such-map")

    def test_declared_domain_enforced(self):
        m = parse_map("1/x", domain=(0.5, 10.0))
        assert m(2.0) == 0.5
        with pytest.raises(DomainEscapeError):
            m(0.0)
        with pytest.raises(DomainEscapeError):
            m.eval_array(np.array([1.0, 20.0]))

    def test_iterated_map(self):
        s2 = IteratedMap(parse_map("x/2"), 2)
        assert s2(1.0) == 0.25
        assert (s2.eval_array(np.array([1.0, 2.0])) == np.array([0.25, 0.5])).all()


class TestPairSampling:
    def test_prefix_stable(self):
        xs1, ys1 = sample_pairs((-5.0, 5.0), 100, seed=42)
        xs2, ys2 = sample_pairs((-5.0, 5.0), 1000, seed=42)
        assert (xs2[:100] == xs1).all()
        assert (ys2[:100] == ys1).all()

    def test_inside_box(self):
        xs, ys = sample_pairs((-2.0, 3.0), 5000, seed=0)
        assert xs.min() >= -2.0 and xs.max() <= 3.0
        assert ys.min() >= -2.0 and ys.max() <= 3.0

    def test_deterministic(self):
        a = sample_pairs((-1.0, 1.0), 500, seed=7)
        b = sample_pairs((-1.0, 1.0), 500, seed=7)
        assert (a[0] == b[0]).all() and (a[1] == b[1]).all()


class TestInjectivityProbe:
    def test_exponential_no_witness(self):
        res = probe_injectivity(parse_map("exp(-x)"), (-5.0, 5.0), seed=0)
        assert res.no_witness

    def test_square_finds_witness(self):
        res = probe_injectivity(parse_map("x*x"), (-2.0, 2.0), seed=0)
        assert res.found_witness
        x, y = res.witness
        f = parse_map("x*x")
        assert x != y
        assert abs(f(x) - f(y)) < 1e-9
        assert abs(f(x) - f(y)) < 1e-9 * abs(x - y)

    def test_translation_no_witness(self):
        res = probe_injectivity(parse_map("x+1"), (-5.0, 5.0), seed=0)
        assert res.no_witness

    def test_cube_no_witness(self):
        res = probe_injectivity(parse_map("x^3"), (-5.0, 5.0), seed=0)
        assert res.no_witness

    def test_cosine_finds_witness(self):
        res = probe_injectivity(parse_map("cos(x)"), (-3.0, 3.0), seed=0)
        assert res.found_witness


class TestModulusEstimation:
    def test_identity_triple_gives_one(self):
        est = estimate_tr_modulus(triple("x", "x", "x"), PROD, (-5.0, 5.0), 5000, seed=1)
        assert est.a_hat == 1.0
        assert not est.certified_contraction

    def test_halving_gives_half(self):
        est = estimate_tr_modulus(triple("x/2", "x", "x"), PROD, (-5.0, 5.0), 5000, seed=1)
        assert est.a_hat == 0.5

    def test_interleaved_exponentials_give_inverse_e(self):
        tri = triple("x+1", "exp(-x)", "2*exp(-x)")
        est = estimate_tr_modulus(tri, EXP33, (-5.0, 5.0), 20_000, seed=42)
        assert abs(est.a_hat - math.exp(-1.0)) < 1e-3
        assert est.certified_contraction
        assert est.box == (-5.0, 5.0)

    def test_monotone_in_pair_count(self):
        tri = triple("1.2*exp(-(x^2))", "x", "x")
        prev = 0.0
        for n in (1000, 5000, 20_000):
            est = estimate_tr_modulus(tri, PROD, (-3.0, 3.0), n, seed=9)
            assert est.a_hat >= prev
            prev = est.a_hat

    def test_component_ratios_agree(self):
        # both builtin metrics scale a fixed vector, so the per-component
        # ratios of one pair must agree to rounding
        from conefix.cone_metric import distance_rows

        tri = triple("x+1", "exp(-x)", "2*exp(-x)")
        xs, ys = sample_pairs((-5.0, 5.0), 200, seed=3)
        sx, sy = tri.S.eval_array(xs), tri.S.eval_array(ys)
        num = distance_rows(EXP33, tri.T.eval_array(sx), tri.R.eval_array(sy))
        den = distance_rows(EXP33, tri.T.eval_array(xs), tri.R.eval_array(ys))
        ok = den > 0
        ratios = np.where(ok, num / np.where(ok, den, 1.0), np.nan)
        for row, keep in zip(ratios, ok):
            vals = row[keep]
            if len(vals):
                assert vals.max() - vals.min() <= 1e-12 * max(1.0, vals.max())

    def test_certificate_sound_and_tight(self):
        tri = triple("x+1", "exp(-x)", "2*exp(-x)")
        est = estimate_tr_modulus(tri, EXP33, (-5.0, 5.0), 10_000, seed=42)
        xs, ys = sample_pairs((-5.0, 5.0), 10_000, seed=42)
        assert modulus_certificate_holds(est.a_hat, tri, EXP33, xs, ys)
        # shrinking a by 1e-6 relative must break the inequality on the witness
        wx, wy = est.witness_pair
        shrunk = est.a_hat * (1.0 - 1e-6)
        assert not modulus_certificate_holds(
            shrunk, tri, EXP33, np.array([wx]), np.array([wy])
        )

    def test_zero_denominator_conventions(self):
        # T = R and x = y: both gaps vanish, the pair is vacuous
        tri = triple("x+1", "x", "x")
        a = pairwise_modulus(tri, PROD, np.array([0.5]), np.array([0.5]))
        assert a[0] == 0.0
        # d(Tx, Ry) = 0 while the image gap is not: no finite modulus fits
        tri2 = triple("x+1", "x", "2*x")
        a2 = pairwise_modulus(tri2, PROD, np.array([1.0]), np.array([0.5]))
        assert math.isinf(a2[0])

    def test_box_outside_domain_rejected(self):
        tri = MapTriple(parse_map("x/2", domain=(-1.0, 1.0)), parse_map("x"), parse_map("x"))
        with pytest.raises(ValidationError):
            estimate_tr_modulus(tri, PROD, (-5.0, 5.0), 100, seed=0)

    def test_norm_ratio_diagnostic_matches_for_proportional_metrics(self):
        tri = triple("x/2", "x", "x")
        est = estimate_tr_modulus(tri, PROD, (-5.0, 5.0), 2000, seed=0)
        assert est.norm_ratio_sup == pytest.approx(0.5, rel=1e-12)


class TestFamilyClassification:
    def test_halving_is_half_contraction(self):
        cls = classify_family(parse_map("x/2"), PROD, (-5.0, 5.0), seed=0)
        assert cls.category == ALPHA_CONTRACTION
        assert cls.alpha == pytest.approx(0.5, abs=1e-9)
        assert cls.factor == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("c", [0.1, 0.5, 0.9])
    def test_linear_maps_alpha_equals_slope(self, c):
        cls = classify_family(parse_map(f"{c}*x"), PROD, (-5.0, 5.0), seed=0)
        assert cls.category == ALPHA_CONTRACTION
        assert cls.alpha == pytest.approx(c, abs=1e-9)

    def test_translation_is_nonexpansive_isometry(self):
        cls = classify_family(parse_map("x+1"), PROD, (-5.0, 5.0), seed=0)
        assert cls.category == NONEXPANSIVE
        assert cls.ratio_sup == pytest.approx(1.0, abs=1e-12)
        assert cls.factor == pytest.approx(1.0, abs=1e-12)

    def test_steep_exponential_outside_family(self):
        # mean value bound: the ratio near x = -5 approaches e^5 > 1
        cls = classify_family(parse_map("exp(-x)"), EXP33, (-5.0, 5.0), seed=0)
        assert cls.category == OUTSIDE_FAMILY
        assert cls.ratio_sup > 1.0

    def test_user_alpha_accepted(self):
        cls = classify_family(parse_map("x/2"), PROD, (-5.0, 5.0), seed=0, alpha=0.6)
        assert cls.category == ALPHA_CONTRACTION
        assert cls.alpha == 0.6

    def test_user_alpha_validated(self):
        with pytest.raises(ValidationError):
            classify_family(parse_map("x/2"), PROD, (-5.0, 5.0), alpha=1.5)


class TestSubsequentialProbe:
    def test_exponential_decay_is_suspect(self):
        probe = probe_subsequential_convergence(
            parse_map("exp(-x)"), EXP33, bound=50.0, n_max=200
        )
        assert probe.verdict == SUSPECT_NON_SUBSEQUENTIAL

    def test_identity_shows_no_evidence(self):
        probe = probe_subsequential_convergence(parse_map("x"), EXP33, bound=50.0, n_max=200)
        assert probe.verdict == NO_EVIDENCE

    def test_bounded_inputs_show_no_evidence(self):
        seqs = [("reciprocal", [1.0 / (n + 1) for n in range(200)])]
        probe = probe_subsequential_convergence(
            parse_map("exp(-x)"), EXP33, bound=50.0, n_max=200, sequences=seqs
        )
        assert probe.verdict == NO_EVIDENCE

    def test_orbit_sequence_used_when_s_given(self):
        probe = probe_subsequential_convergence(
            parse_map("exp(-x)"), EXP33, S=parse_map("x+1"), x0=0.0, bound=50.0, n_max=200
        )
        assert probe.verdict == SUSPECT_NON_SUBSEQUENTIAL


class TestProbeTriple:
    def test_full_probe_marks_eligibility(self):
        tri = probe_triple(
            parse_map("x+1"), parse_map("exp(-x)"), parse_map("2*exp(-x)"),
            EXP33, (-5.0, 5.0), seed=42,
        )
        assert tri.solver_eligible
        assert tri.family_T is not None and tri.family_T.category == OUTSIDE_FAMILY

    def test_non_injective_member_blocks_eligibility(self):
        tri = probe_triple(
            parse_map("x/2"), parse_map("x*x"), parse_map("x"),
            PROD, (-2.0, 2.0), seed=0,
        )
        assert not tri.solver_eligible

    def test_unprobed_triple_not_eligible(self):
        tri = MapTriple(parse_map("x"), parse_map("x"), parse_map("x"))
        assert not tri.solver_eligible
