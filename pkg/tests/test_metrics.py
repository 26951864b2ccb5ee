"""Ranking distance, distribution divergence, rank-sum tests, beat counts."""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np
import pytest

from cj_engine.core import RankDistribution
from cj_engine.errors import (
    InvalidDistributionError,
    InvalidRankingError,
    PairingError,
    ValidationError,
)
from cj_engine.metrics import (
    BONFERRONI_M_DEFAULT,
    RANK_SUM_EXACT_LIMIT,
    _exact_upper_tail,
    _midranks,
    beat_count,
    jsd,
    kendall_tau_distance,
    rank_sum_pvalue,
    worst_jsd,
)
from oracles import discordant_fraction, exhaustive_rank_sum_pvalue, midranks


def dist(item: int, probs) -> RankDistribution:
    probs = np.asarray(probs, dtype=float)
    expected = float(np.arange(1, len(probs) + 1) @ probs)
    return RankDistribution(item=item, probs=probs, expected_rank=expected, method="exact")


class TestKendallTauDistance:
    def test_identical_rankings(self):
        ranks = list(range(1, 11))
        assert kendall_tau_distance(ranks, ranks) == 0.0

    def test_full_reversal(self):
        ranks = list(range(1, 11))
        assert kendall_tau_distance(ranks, ranks[::-1]) == 1.0

    def test_single_adjacent_swap_in_twenty_five(self):
        a = list(range(1, 26))
        b = list(a)
        b[6], b[7] = b[7], b[6]
        assert kendall_tau_distance(a, b) == pytest.approx(1 / 300, abs=1e-15)

    def test_jump_of_nine_places(self):
        # the item ranked tenth moves to the top, displacing nine others:
        # nine discordant pairs out of three hundred
        a = list(range(1, 26))
        b = [r + 1 if r < 10 else r for r in a]
        b[9] = 1
        assert kendall_tau_distance(a, b) == pytest.approx(0.03, abs=1e-15)

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(101)
        for _ in range(60):
            n = int(rng.integers(2, 9))
            a = rng.permutation(n) + 1
            b = rng.permutation(n) + 1
            assert kendall_tau_distance(a, b) == pytest.approx(
                discordant_fraction(a, b), abs=1e-15
            )

    def test_symmetry(self):
        rng = np.random.default_rng(103)
        for _ in range(30):
            n = int(rng.integers(2, 9))
            a = rng.permutation(n) + 1
            b = rng.permutation(n) + 1
            assert kendall_tau_distance(a, b) == kendall_tau_distance(b, a)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(107)
        for _ in range(30):
            n = int(rng.integers(2, 8))
            a, b, c = (rng.permutation(n) + 1 for _ in range(3))
            ab = kendall_tau_distance(a, b)
            bc = kendall_tau_distance(b, c)
            ac = kendall_tau_distance(a, c)
            assert ac <= ab + bc + 1e-12

    def test_validation(self):
        with pytest.raises(InvalidRankingError):
            kendall_tau_distance([1], [1])
        with pytest.raises(InvalidRankingError):
            kendall_tau_distance([1, 2], [1, 3])
        with pytest.raises(InvalidRankingError):
            kendall_tau_distance([1, 1, 2], [1, 2, 3])
        with pytest.raises(InvalidRankingError):
            kendall_tau_distance([1, 2, 3], [1, 2])


class TestJsd:
    def test_identical_distributions(self):
        p = [0.2, 0.3, 0.5]
        assert jsd(p, p) == 0.0

    def test_disjoint_supports_hit_the_upper_bound(self):
        assert jsd([1.0, 0.0], [0.0, 1.0]) == 1.0
        assert jsd([0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]) == 1.0

    def test_symmetry_exact(self):
        rng = np.random.default_rng(109)
        for _ in range(40):
            n = int(rng.integers(2, 10))
            p = rng.dirichlet(np.ones(n))
            q = rng.dirichlet(np.ones(n))
            assert jsd(p, q) == jsd(q, p)

    def test_bounded_and_zero_only_at_equality(self):
        rng = np.random.default_rng(113)
        for _ in range(40):
            n = int(rng.integers(2, 10))
            p = rng.dirichlet(np.ones(n))
            q = rng.dirichlet(np.ones(n))
            value = jsd(p, q)
            assert 0.0 <= value <= 1.0
            assert value > 0.0

    def test_zero_cells_contribute_nothing(self):
        value = jsd([0.5, 0.5, 0.0], [0.25, 0.25, 0.5])
        assert math.isfinite(value)
        assert value > 0.0

    def test_hand_computed_value(self):
        # p=(1,0), q=(1/2,1/2), m=(3/4,1/4):
        # 0.5*log2(4/3) + 0.25*log2(2/3) + 0.25*log2(2)
        expected = 0.5 * (1.0 * math.log2(4 / 3)) + 0.5 * (
            0.5 * math.log2(2 / 3) + 0.5 * math.log2(2.0)
        )
        assert jsd([1.0, 0.0], [0.5, 0.5]) == pytest.approx(expected, abs=1e-12)

    def test_validation(self):
        with pytest.raises(InvalidDistributionError):
            jsd([0.5, 0.5], [1.0, 0.0, 0.0])
        with pytest.raises(InvalidDistributionError):
            jsd([0.7, 0.4], [0.5, 0.5])
        with pytest.raises(InvalidDistributionError):
            jsd([-0.1, 1.1], [0.5, 0.5])


class TestWorstJsd:
    def test_pairs_by_item_id(self):
        estimates = [dist(1, [1.0, 0.0]), dist(2, [0.0, 1.0])]
        targets = [dist(2, [0.0, 1.0]), dist(1, [1.0, 0.0])]
        assert worst_jsd(estimates, targets) == 0.0

    def test_returns_the_largest_divergence(self):
        estimates = [dist(1, [1.0, 0.0]), dist(2, [0.5, 0.5])]
        targets = [dist(1, [0.0, 1.0]), dist(2, [0.5, 0.5])]
        assert worst_jsd(estimates, targets) == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(PairingError):
            worst_jsd([dist(1, [1.0])], [])

    def test_unknown_item_rejected(self):
        with pytest.raises(PairingError):
            worst_jsd([dist(3, [1.0])], [dist(1, [1.0])])


class TestMidranks:
    def test_distinct_values(self):
        assert np.array_equal(_midranks(np.array([30.0, 10.0, 20.0])), [3.0, 1.0, 2.0])

    def test_ties_share_the_average(self):
        assert np.array_equal(_midranks(np.array([5.0, 5.0, 1.0])), [2.5, 2.5, 1.0])

    def test_matches_oracle(self):
        rng = np.random.default_rng(127)
        for _ in range(30):
            values = rng.integers(0, 5, size=int(rng.integers(2, 12))).astype(float)
            assert np.allclose(_midranks(values), midranks(values))


class TestRankSumPvalue:
    def test_separated_triples(self):
        # {4,5,6} above {1,2,3} is the most extreme of the twenty splits
        assert rank_sum_pvalue([4, 5, 6], [1, 2, 3]) == pytest.approx(0.05, abs=1e-12)
        assert rank_sum_pvalue([1, 2, 3], [4, 5, 6]) == pytest.approx(1.0, abs=1e-12)
        assert rank_sum_pvalue([1, 2, 3], [4, 5, 6], alternative="less") == pytest.approx(
            0.05, abs=1e-12
        )

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(131)
        for _ in range(60):
            n1 = int(rng.integers(1, 7))
            n2 = int(rng.integers(1, 7))
            x = rng.uniform(0.0, 1.0, n1)
            y = rng.uniform(0.0, 1.0, n2)
            assert rank_sum_pvalue(x, y) == pytest.approx(
                exhaustive_rank_sum_pvalue(x, y), abs=1e-12
            )

    def test_matches_exhaustive_oracle_with_ties(self):
        rng = np.random.default_rng(137)
        for _ in range(60):
            n1 = int(rng.integers(1, 7))
            n2 = int(rng.integers(1, 7))
            x = rng.integers(0, 4, n1).astype(float)
            y = rng.integers(0, 4, n2).astype(float)
            assert rank_sum_pvalue(x, y) == pytest.approx(
                exhaustive_rank_sum_pvalue(x, y), abs=1e-12
            )

    def test_identical_samples_are_not_significant(self):
        values = [1.0, 2.0, 3.0, 4.0]
        assert rank_sum_pvalue(values, values) > 0.4

    def test_normal_approximation_agrees_with_counting(self):
        # at the crossover size the approximate tail should sit within a
        # percentage point of the exact permutation count
        rng = np.random.default_rng(139)
        n = RANK_SUM_EXACT_LIMIT
        x = rng.normal(0.6, 1.0, n)
        y = rng.normal(0.0, 1.0, n)
        approx = rank_sum_pvalue(x, y)
        ranks = _midranks(np.concatenate([x, y]))
        doubled = np.rint(2 * ranks).astype(int).tolist()
        exact = _exact_upper_tail(doubled, n, int(round(2 * ranks[:n].sum())))
        assert approx == pytest.approx(exact, abs=0.01)

    def test_validation(self):
        with pytest.raises(ValidationError):
            rank_sum_pvalue([], [1.0])
        with pytest.raises(ValidationError):
            rank_sum_pvalue([1.0], [1.0], alternative="two-sided")


class TestBeatCount:
    def test_identical_methods_never_beaten(self):
        scores = [0.3, 0.1, 0.2, 0.25, 0.15]
        results = {f"m{k}": list(scores) for k in range(6)}
        assert beat_count(results) == {f"m{k}": 0 for k in range(6)}

    def test_uniformly_worse_method_beaten_by_all(self):
        rng = np.random.default_rng(149)
        results = {f"m{k}": rng.uniform(0.0, 0.1, 10).tolist() for k in range(5)}
        results["laggard"] = rng.uniform(0.9, 1.0, 10).tolist()
        counts = beat_count(results)
        assert counts["laggard"] == 5
        assert all(counts[f"m{k}"] == 0 for k in range(5))

    def test_correction_scales_with_rival_count(self):
        # the same p-value clears a lenient correction and misses a
        # strict one
        x = [1.0, 2.0, 3.0]
        y = [4.0, 5.0, 6.0]
        results = {"a": y, "b": x}
        assert beat_count(results, alpha=0.05, m=1) == {"a": 1, "b": 0}
        assert beat_count(results, alpha=0.05, m=2) == {"a": 0, "b": 0}

    def test_default_rival_count(self):
        assert BONFERRONI_M_DEFAULT == 5
        # six methods default to five rivals: p = 1/C(20,10) clears 0.01
        rng = np.random.default_rng(151)
        results = {f"m{k}": rng.uniform(0.0, 0.1, 10).tolist() for k in range(5)}
        results["laggard"] = rng.uniform(0.9, 1.0, 10).tolist()
        lenient = beat_count(results, alpha=0.05)
        strict = beat_count(results, alpha=1e-9)
        assert lenient["laggard"] == 5
        assert strict["laggard"] == 0

    def test_mismatched_repeat_counts_rejected(self):
        with pytest.raises(PairingError):
            beat_count({"a": [0.1, 0.2], "b": [0.1]})


class TestOracleSelfConsistency:
    def test_exhaustive_oracle_is_a_probability(self):
        rng = np.random.default_rng(157)
        for _ in range(20):
            x = rng.uniform(0.0, 1.0, int(rng.integers(1, 6)))
            y = rng.uniform(0.0, 1.0, int(rng.integers(1, 6)))
            p = exhaustive_rank_sum_pvalue(x, y)
            assert 0.0 < p <= 1.0

    def test_discordant_fraction_on_all_three_item_pairs(self):
        for a in permutations((1, 2, 3)):
            for b in permutations((1, 2, 3)):
                value = discordant_fraction(list(a), list(b))
                assert value in {0.0, 1 / 3, 2 / 3, 1.0}
