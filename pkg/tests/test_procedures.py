import dataclasses
import itertools
import math

import numpy as np
import pytest
from scipy.optimize import brentq

import coprimary.procedures as procedures
from coprimary import (
    Calibration,
    HypothesisSpec,
    MethodKind,
    MethodSpec,
    StudyData,
    decide_bonferroni,
    decide_maxt,
    decide_none,
    decide_pairs_bootstrap,
    decide_wild_bootstrap,
    apply_method,
    make_rng,
    std_normal_cdf,
    std_normal_quantile,
    summarize,
    validate_study,
)

from conftest import bernoulli_study

HYP = HypothesisSpec(se0=0.8, sp0=0.7, alpha=0.025)


def all_method_specs(seed=5, b_boot=500, mc_draws=20_000):
    return [
        MethodSpec(kind=k, b_boot=b_boot, mc_draws=mc_draws, seed=seed) for k in MethodKind
    ]


class TestNone:
    def test_critical_values(self):
        data = bernoulli_study(1, 60, 80, 0.9, 0.85)
        res = decide_none(summarize(data, HYP), HYP)
        assert res.c_comparison == pytest.approx(1.95996, abs=1e-5)
        assert res.c_confidence == pytest.approx(std_normal_quantile(0.9875), abs=1e-9)

    def test_rejection_and_p_value(self):
        # z pair (3.0, 2.5): min 2.5 > 1.96 rejects with p = 1 - Phi(2.5)
        data = bernoulli_study(1, 60, 80, 0.9, 0.85)
        summary = summarize(data, HYP)
        fake = dataclasses.replace(
            summary, z_se=np.array([3.0] * data.m), z_sp=np.array([2.5] * data.m)
        )
        res = decide_none(fake, HYP)
        assert bool(res.reject[0])
        assert res.p_adj[0] == pytest.approx(1 - std_normal_cdf(2.5), abs=1e-9)

    def test_min_below_quantile_not_rejected(self):
        data = bernoulli_study(1, 60, 80, 0.9, 0.85)
        summary = summarize(data, HYP)
        fake = dataclasses.replace(
            summary, z_se=np.array([3.0] * data.m), z_sp=np.array([1.0] * data.m)
        )
        res = decide_none(fake, HYP)
        assert not res.reject.any()


class TestBonferroni:
    def test_m1_reduces_to_none(self):
        data = bernoulli_study(2, 50, 50, 0.9, 0.9, m=1)
        summary = summarize(data, HYP)
        assert decide_bonferroni(summary, HYP).c_comparison == pytest.approx(
            decide_none(summary, HYP).c_comparison
        )

    def test_m10_quantiles(self):
        data = bernoulli_study(3, 50, 50, 0.9, 0.9, m=10)
        res = decide_bonferroni(summarize(data, HYP), HYP)
        assert res.c_comparison == pytest.approx(2.80703, abs=1e-5)
        assert res.c_confidence == pytest.approx(3.02334, abs=1e-5)

    def test_p_adj_capped(self):
        data = bernoulli_study(4, 30, 30, 0.5, 0.5, m=5)
        res = decide_bonferroni(summarize(data, HYP), HYP)
        assert np.all(res.p_adj <= 1.0)


class TestMaxt:
    def test_binding_m1_matches_unadjusted(self):
        # a single test with both coordinates live selects one coordinate:
        # the 1-dim equicoordinate quantile is z_{1-alpha}
        data = bernoulli_study(5, 400, 400, 0.9, 0.85, m=1)
        res = decide_maxt(summarize(data, HYP), HYP, MethodSpec(kind=MethodKind.MAXT, seed=5))
        assert res.c_comparison == pytest.approx(1.95996, abs=0.02)

    def test_binding_independent_closed_form(self):
        # 10 independent selected coordinates: Phi(c)^10 = 1 - alpha
        data = bernoulli_study(6, 4000, 4000, 0.85, 0.85, m=10)
        summary = summarize(data, HYP)
        res = decide_maxt(summary, HYP, MethodSpec(kind=MethodKind.MAXT, seed=6))
        expected = std_normal_quantile((1 - HYP.alpha) ** 0.1)
        assert res.c_comparison == pytest.approx(expected, abs=0.05)

    def test_max_min_m1_anomaly(self):
        # max-min calibration at m=1 under independence solves (1-Phi(c))^2 = alpha,
        # well below the unadjusted 1.96; this motivates the calibration flag
        data = bernoulli_study(7, 500, 500, 0.9, 0.85, m=1)
        res = decide_maxt(
            summarize(data, HYP), HYP,
            MethodSpec(kind=MethodKind.MAXT, seed=7, calibration=Calibration.MAX_MIN),
        )
        expected = std_normal_quantile(1 - math.sqrt(HYP.alpha))
        assert res.c_comparison == pytest.approx(expected, abs=0.04)
        assert res.c_comparison < 1.95996

    def test_max_min_independent_closed_form(self):
        # (1 - (1 - Phi(c))^2)^10 = 1 - alpha under independence
        data = bernoulli_study(8, 4000, 4000, 0.85, 0.85, m=10)
        res = decide_maxt(
            summarize(data, HYP), HYP,
            MethodSpec(kind=MethodKind.MAXT, seed=8, calibration=Calibration.MAX_MIN),
        )
        expected = brentq(
            lambda c: (1 - (1 - std_normal_cdf(c)) ** 2) ** 10 - (1 - HYP.alpha), 0.0, 5.0
        )
        assert res.c_comparison == pytest.approx(expected, abs=0.05)

    def test_duplicated_tests_collapse(self):
        # perfectly correlated duplicates calibrate like a single test
        rng = make_rng(9)
        col1 = (rng.random(800) < 0.9).astype(np.uint8)
        col0 = (rng.random(800) < 0.85).astype(np.uint8)
        data = validate_study(
            StudyData(q1=np.column_stack([col1] * 5), q0=np.column_stack([col0] * 5))
        )
        res = decide_maxt(summarize(data, HYP), HYP, MethodSpec(kind=MethodKind.MAXT, seed=9))
        assert res.c_comparison == pytest.approx(1.95996, abs=0.05)

    def test_equicoordinate_2m_uses_confidence_value(self):
        data = bernoulli_study(10, 100, 100, 0.85, 0.8, m=3)
        res = decide_maxt(
            summarize(data, HYP), HYP,
            MethodSpec(kind=MethodKind.MAXT, seed=10, calibration=Calibration.EQUICOORDINATE_2M),
        )
        assert res.c_comparison == res.c_confidence

    def test_deterministic(self):
        data = bernoulli_study(11, 80, 90, 0.9, 0.8, m=4)
        summary = summarize(data, HYP)
        spec = MethodSpec(kind=MethodKind.MAXT, seed=11)
        a = decide_maxt(summary, HYP, spec)
        b = decide_maxt(summary, HYP, spec)
        assert a.c_comparison == b.c_comparison
        np.testing.assert_array_equal(a.p_adj, b.p_adj)


class TestPairsBootstrap:
    def test_degenerate_data_gives_zero(self):
        q1 = np.tile(np.array([[1, 0]], dtype=np.uint8), (6, 1))
        q0 = np.tile(np.array([[1, 1]], dtype=np.uint8), (8, 1))
        data = validate_study(StudyData(q1=q1, q0=q0))
        hyp = HypothesisSpec(se0=0.5, sp0=0.5)
        res, stats = decide_pairs_bootstrap(
            data, summarize(data, hyp), hyp,
            MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=500, seed=3), return_stats=True,
        )
        assert res.c_comparison == 0.0
        assert np.all(stats["t_comparison"] == 0.0)

    def test_quantile_convention_on_stats(self):
        # c is the type-1 empirical quantile of the replicate statistics
        from coprimary import empirical_quantile

        data = bernoulli_study(12, 40, 50, 0.9, 0.8, m=2)
        hyp = HYP
        res, stats = decide_pairs_bootstrap(
            data, summarize(data, hyp), hyp,
            MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=400, seed=12), return_stats=True,
        )
        assert res.c_comparison == empirical_quantile(stats["t_comparison"], 1 - hyp.alpha)
        assert res.c_confidence == empirical_quantile(stats["t_confidence"], 1 - hyp.alpha)

    def test_row_permutation_invariance(self):
        data = bernoulli_study(13, 35, 45, 0.85, 0.75, m=3)
        rng = np.random.default_rng(0)
        shuffled = validate_study(
            StudyData(
                q1=data.q1[rng.permutation(data.n1)],
                q0=data.q0[rng.permutation(data.n0)],
                test_names=data.test_names,
            )
        )
        spec = MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=300, seed=13)
        a = decide_pairs_bootstrap(data, summarize(data, HYP), HYP, spec)
        b = decide_pairs_bootstrap(shuffled, summarize(shuffled, HYP), HYP, spec)
        assert a.c_comparison == b.c_comparison
        np.testing.assert_array_equal(a.p_adj, b.p_adj)

    def test_agreement_with_maxt_large_n(self):
        # percentile-t skew corrections vanish at large n
        rng = make_rng(321)
        q1 = (rng.random((2000, 1)) < 0.9).astype(np.uint8)
        q0 = (rng.random((2000, 1)) < 0.9).astype(np.uint8)
        data = validate_study(StudyData(q1=q1, q0=q0))
        hyp = HypothesisSpec(se0=0.9, sp0=0.9, alpha=0.025)
        summary = summarize(data, hyp)
        c_pairs = decide_pairs_bootstrap(
            data, summary, hyp, MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=4000, seed=7)
        ).c_comparison
        c_maxt = decide_maxt(summary, hyp, MethodSpec(kind=MethodKind.MAXT, seed=7)).c_comparison
        assert abs(c_pairs - c_maxt) <= 0.15

    def test_agreement_with_maxt_max_min_mode(self):
        # moderate n, both coordinates live: bootstrap vs parametric max-min
        rng = make_rng(123)
        q1 = (rng.random((200, 1)) < 0.9).astype(np.uint8)
        q0 = (rng.random((200, 1)) < 0.9).astype(np.uint8)
        data = validate_study(StudyData(q1=q1, q0=q0))
        hyp = HypothesisSpec(se0=0.9, sp0=0.9, alpha=0.025)
        summary = summarize(data, hyp)
        c_pairs = decide_pairs_bootstrap(
            data, summary, hyp,
            MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=4000, seed=7,
                       calibration=Calibration.MAX_MIN),
        ).c_comparison
        c_maxt = decide_maxt(
            summary, hyp,
            MethodSpec(kind=MethodKind.MAXT, seed=7, calibration=Calibration.MAX_MIN),
        ).c_comparison
        assert abs(c_pairs - c_maxt) <= 0.15

    def test_exhaustive_enumeration_oracle(self):
        # n1 = 4 with distinct rows, n0 degenerate: the comparison statistic
        # depends only on the diseased-group resample, so all 4^4 ordered
        # resamples enumerate its exact distribution.
        q1 = np.array([[1, 1], [1, 0], [0, 1], [1, 1]], dtype=np.uint8)
        q0 = np.tile(np.array([[1, 1]], dtype=np.uint8), (4, 1))
        data = validate_study(StudyData(q1=q1, q0=q0))
        hyp = HypothesisSpec(se0=0.5, sp0=0.5, alpha=0.25)
        summary = summarize(data, hyp)

        pc = procedures.BOOT_PSEUDO_COUNT
        n = 4
        center = (q1.sum(axis=0) + pc) / (n + 2 * pc)
        t_values = []
        for idx in itertools.product(range(n), repeat=n):
            counts = q1[list(idx)].sum(axis=0)
            est = (counts + pc) / (n + 2 * pc)
            se = np.sqrt(est * (1 - est) / n)
            t_values.append(np.max((est - center) / se))
        t_values = np.sort(np.array(t_values))
        # exact type-1 quantile of the enumerated distribution
        oracle = t_values[math.ceil((1 - hyp.alpha) * t_values.size) - 1]

        res = decide_pairs_bootstrap(
            data, summary, hyp,
            MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=20_000, seed=99),
        )
        assert res.c_comparison == pytest.approx(oracle, abs=0.05)


class TestWildBootstrap:
    def test_all_weights_one_gives_zero(self, monkeypatch):
        monkeypatch.setattr(
            procedures, "_wild_weights", lambda rng, shape, kind: np.ones(shape)
        )
        data = bernoulli_study(14, 30, 40, 0.8, 0.7, m=2)
        res, stats = decide_wild_bootstrap(
            data, summarize(data, HYP), HYP,
            MethodSpec(kind=MethodKind.WILD_BOOT, b_boot=200, seed=14), return_stats=True,
        )
        np.testing.assert_allclose(stats["t_comparison"], 0.0, atol=1e-12)
        assert res.c_comparison == pytest.approx(0.0, abs=1e-12)

    def test_single_subject_group_statistic_zero(self):
        data = validate_study(
            StudyData(q1=np.array([[1, 0]], dtype=np.uint8), q0=np.array([[1, 1]], dtype=np.uint8))
        )
        hyp = HypothesisSpec(se0=0.5, sp0=0.5)
        res, stats = decide_wild_bootstrap(
            data, summarize(data, hyp), hyp,
            MethodSpec(kind=MethodKind.WILD_BOOT, b_boot=200, seed=15), return_stats=True,
        )
        assert np.all(stats["t_comparison"] == 0.0)
        assert np.all(stats["t_confidence"] == 0.0)

    def test_agreement_with_pairs_large_n(self):
        rng = make_rng(321)
        q1 = (rng.random((2000, 1)) < 0.9).astype(np.uint8)
        q0 = (rng.random((2000, 1)) < 0.9).astype(np.uint8)
        data = validate_study(StudyData(q1=q1, q0=q0))
        hyp = HypothesisSpec(se0=0.9, sp0=0.9, alpha=0.025)
        summary = summarize(data, hyp)
        c_pairs = decide_pairs_bootstrap(
            data, summary, hyp, MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=4000, seed=7)
        ).c_comparison
        c_wild = decide_wild_bootstrap(
            data, summary, hyp, MethodSpec(kind=MethodKind.WILD_BOOT, b_boot=4000, seed=7)
        ).c_comparison
        assert abs(c_pairs - c_wild) <= 0.15

    def test_mammen_weights_runs(self):
        data = bernoulli_study(16, 40, 40, 0.85, 0.8, m=2)
        from coprimary import WildWeights

        res = decide_wild_bootstrap(
            data, summarize(data, HYP), HYP,
            MethodSpec(kind=MethodKind.WILD_BOOT, b_boot=300, seed=16,
                       wild_weights=WildWeights.MAMMEN),
        )
        assert np.isfinite(res.c_comparison)

    def test_row_permutation_invariance(self):
        data = bernoulli_study(17, 30, 30, 0.8, 0.8, m=2)
        rng = np.random.default_rng(1)
        shuffled = validate_study(
            StudyData(q1=data.q1[rng.permutation(data.n1)], q0=data.q0[rng.permutation(data.n0)])
        )
        spec = MethodSpec(kind=MethodKind.WILD_BOOT, b_boot=300, seed=17)
        a = decide_wild_bootstrap(data, summarize(data, HYP), HYP, spec)
        b = decide_wild_bootstrap(shuffled, summarize(shuffled, HYP), HYP, spec)
        assert a.c_comparison == b.c_comparison


@pytest.fixture(scope="module", params=[31, 32, 33])
def dataset(request):
    seed = request.param
    rng = make_rng(seed)
    m = 4
    p1 = rng.uniform(0.6, 0.95, m)
    p0 = rng.uniform(0.55, 0.9, m)
    return bernoulli_study(seed, 60, 90, p1, p0)


class TestCrossMethodInvariants:

    def test_rejection_duality(self, dataset):
        summary = summarize(dataset, HYP)
        for spec in all_method_specs():
            res = apply_method(dataset, summary, HYP, spec)
            np.testing.assert_array_equal(res.reject, summary.min_z > res.c_comparison)

    def test_bonferroni_dominates_maxt(self, dataset):
        summary = summarize(dataset, HYP)
        c_bonf = decide_bonferroni(summary, HYP).c_comparison
        c_maxt = decide_maxt(summary, HYP, MethodSpec(kind=MethodKind.MAXT, seed=2)).c_comparison
        assert c_bonf >= c_maxt - 0.03

    def test_confidence_at_least_comparison(self, dataset):
        summary = summarize(dataset, HYP)
        for spec in all_method_specs():
            res = apply_method(dataset, summary, HYP, spec)
            assert res.c_confidence >= res.c_comparison - 0.03

    def test_p_adj_alpha_implies_reject(self, dataset):
        summary = summarize(dataset, HYP)
        for spec in all_method_specs():
            res = apply_method(dataset, summary, HYP, spec)
            flagged = res.p_adj <= HYP.alpha
            assert np.all(res.reject[flagged])

    def test_p_adj_antitone_in_statistic(self, dataset):
        summary = summarize(dataset, HYP)
        order = np.argsort(summary.min_z)
        for spec in all_method_specs():
            res = apply_method(dataset, summary, HYP, spec)
            sorted_p = res.p_adj[order]
            assert np.all(np.diff(sorted_p) <= 1e-12)

    def test_column_permutation_equivariance(self, dataset):
        perm = np.array([2, 0, 3, 1])
        permuted = validate_study(
            StudyData(q1=dataset.q1[:, perm], q0=dataset.q0[:, perm])
        )
        for decide in (decide_none, decide_bonferroni):
            base = decide(summarize(dataset, HYP), HYP)
            moved = decide(summarize(permuted, HYP), HYP)
            np.testing.assert_allclose(moved.p_adj, base.p_adj[perm], atol=1e-12)
            np.testing.assert_array_equal(moved.reject, base.reject[perm])

    def test_bit_reproducibility(self, dataset):
        summary = summarize(dataset, HYP)
        for spec in all_method_specs():
            a = apply_method(dataset, summary, HYP, spec)
            b = apply_method(dataset, summary, HYP, spec)
            assert a.c_comparison == b.c_comparison
            assert a.c_confidence == b.c_confidence
            np.testing.assert_array_equal(a.p_adj, b.p_adj)


class TestMethodSpec:
    def test_b_boot_floor(self):
        with pytest.raises(ValueError):
            MethodSpec(kind=MethodKind.PAIRS_BOOT, b_boot=50)

    def test_mc_draws_floor(self):
        with pytest.raises(ValueError):
            MethodSpec(kind=MethodKind.MAXT, mc_draws=100)
