"""Pair selection policies and the posterior entropy they steer by."""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest

from cj_engine.core import PreferenceCell, PreferenceMatrix
from cj_engine.errors import ConfigError, InvalidPosteriorError, NotEnoughItemsError
from cj_engine.selectors import (
    ENTROPY_TIE_TOL,
    SELECTOR_KINDS,
    beta_entropy,
    entropy_grid,
    make_selector,
    max_entropy,
    select_entropy,
    select_nrp,
    select_pair,
    select_random,
)
from oracles import entropy_quadrature


class TestBetaEntropy:
    def test_uniform_prior_has_zero_entropy(self):
        assert beta_entropy(PreferenceCell()) == 0.0

    def test_one_win_constant(self):
        cell = PreferenceCell(wins_i=1)
        assert beta_entropy(cell) == pytest.approx(-0.19315, abs=1e-4)

    def test_one_win_each_constant(self):
        cell = PreferenceCell(wins_i=1, wins_j=1)
        assert beta_entropy(cell) == pytest.approx(-0.1251, abs=1e-3)

    def test_matches_quadrature_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            wins_i = int(rng.integers(0, 15))
            wins_j = int(rng.integers(0, 15))
            cell = PreferenceCell(wins_i=wins_i, wins_j=wins_j)
            oracle = entropy_quadrature(wins_i + 1.0, wins_j + 1.0)
            assert beta_entropy(cell) == pytest.approx(oracle, abs=1e-8)

    def test_symmetric_in_shapes(self):
        for a in range(0, 12):
            for b in range(0, 12):
                forward = beta_entropy(PreferenceCell(wins_i=a, wins_j=b))
                backward = beta_entropy(PreferenceCell(wins_i=b, wins_j=a))
                assert forward == backward

    def test_any_judgement_lowers_entropy(self):
        cell = PreferenceCell()
        h = beta_entropy(cell)
        for _ in range(10):
            cell = cell.with_win_for_i()
            h_next = beta_entropy(cell)
            assert h_next < h
            h = h_next

    def test_balanced_wins_also_lower_entropy(self):
        levels = [beta_entropy(PreferenceCell(wins_i=k, wins_j=k)) for k in range(8)]
        assert all(lo > hi for lo, hi in zip(levels, levels[1:]))

    def test_sharp_posterior_entropy_goes_deeply_negative(self):
        assert beta_entropy(PreferenceCell(wins_i=200, wins_j=1)) < -2.0


class TestEntropyGrid:
    def test_fresh_grid_is_zero_off_diagonal(self):
        grid = entropy_grid(PreferenceMatrix.uniform(4))
        assert grid.shape == (4, 4)
        assert np.all(np.isnan(np.diag(grid)))
        off = ~np.eye(4, dtype=bool)
        assert np.all(grid[off] == 0.0)

    def test_grid_is_symmetric(self):
        matrix = PreferenceMatrix.uniform(5)
        rng = np.random.default_rng(43)
        for _ in range(20):
            winner, loser = rng.choice(5, size=2, replace=False) + 1
            matrix = matrix.with_judgement(int(winner), int(loser))
        grid = entropy_grid(matrix)
        off = ~np.eye(5, dtype=bool)
        assert np.array_equal(grid[off], grid.T[off])

    def test_judged_cell_drops_below_rest(self):
        matrix = PreferenceMatrix.uniform(3).with_judgement(1, 2)
        grid = entropy_grid(matrix)
        assert grid[0, 1] < grid[0, 2]
        assert grid[0, 2] == 0.0

    def test_max_entropy_agrees_with_grid(self):
        matrix = PreferenceMatrix.uniform(4).with_judgement(2, 1).with_judgement(3, 4)
        grid = entropy_grid(matrix)
        assert max_entropy(matrix) == np.nanmax(grid)

    def test_max_entropy_never_increases_under_judgements(self):
        matrix = PreferenceMatrix.uniform(5)
        rng = np.random.default_rng(47)
        level = max_entropy(matrix)
        for _ in range(30):
            winner, loser = rng.choice(5, size=2, replace=False) + 1
            matrix = matrix.with_judgement(int(winner), int(loser))
            level_next = max_entropy(matrix)
            assert level_next <= level + 1e-12
            level = level_next


class TestMakeSelector:
    def test_kinds_are_closed(self):
        assert SELECTOR_KINDS == ("random", "nrp", "entropy")
        for kind in SELECTOR_KINDS:
            assert make_selector(kind, seed=0).kind == kind

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            make_selector("greedy", seed=0)

    def test_seed_sequence_accepted(self):
        state = make_selector("random", seed=None)
        assert state.rng is not None


class TestSelectRandom:
    def test_two_items_always_the_single_pair(self):
        state = make_selector("random", seed=0)
        for _ in range(10):
            assert select_random(2, state) == (1, 2)

    def test_needs_two_items(self):
        with pytest.raises(NotEnoughItemsError):
            select_random(1, make_selector("random", seed=0))

    def test_same_seed_same_stream(self):
        a = make_selector("random", seed=5)
        b = make_selector("random", seed=5)
        picks_a = [select_random(6, a) for _ in range(50)]
        picks_b = [select_random(6, b) for _ in range(50)]
        assert picks_a == picks_b

    def test_covers_all_pairs_roughly_uniformly(self):
        state = make_selector("random", seed=9)
        n, draws = 5, 4000
        counts: dict[tuple[int, int], int] = {}
        for _ in range(draws):
            pair = select_random(n, state)
            counts[pair] = counts.get(pair, 0) + 1
        assert set(counts) == set(combinations(range(1, n + 1), 2))
        expected = draws / math.comb(n, 2)
        sigma = math.sqrt(draws * (1 / 10) * (9 / 10))
        for count in counts.values():
            # generous five-sigma band: ten cells are checked jointly
            assert abs(count - expected) < 5.0 * sigma


class TestSelectNrp:
    def test_round_contains_every_pair_once(self):
        state = make_selector("nrp", seed=1)
        n = 5
        round_pairs = [select_nrp(n, state) for _ in range(math.comb(n, 2))]
        assert sorted(round_pairs) == sorted(combinations(range(1, n + 1), 2))

    def test_consecutive_rounds_reshuffle(self):
        state = make_selector("nrp", seed=2)
        n = 6
        per_round = math.comb(n, 2)
        first = [select_nrp(n, state) for _ in range(per_round)]
        second = [select_nrp(n, state) for _ in range(per_round)]
        assert sorted(first) == sorted(second)
        assert first != second

    def test_no_repeats_within_budget_smaller_than_round(self):
        state = make_selector("nrp", seed=3)
        picks = [select_nrp(5, state) for _ in range(10)]
        assert len(set(picks)) == 10

    def test_needs_two_items(self):
        with pytest.raises(NotEnoughItemsError):
            select_nrp(1, make_selector("nrp", seed=0))


class TestSelectEntropy:
    def test_full_tie_is_uniform_over_pairs(self):
        matrix = PreferenceMatrix.uniform(4)
        state = make_selector("entropy", seed=7)
        counts: dict[tuple[int, int], int] = {}
        draws = 3000
        for _ in range(draws):
            pair = select_entropy(matrix, state)
            counts[pair] = counts.get(pair, 0) + 1
        assert set(counts) == set(combinations(range(1, 5), 2))
        expected = draws / 6
        sigma = math.sqrt(draws * (1 / 6) * (5 / 6))
        for count in counts.values():
            assert abs(count - expected) < 5.0 * sigma

    def test_avoids_the_settled_pair(self):
        matrix = PreferenceMatrix.uniform(3).with_judgement(1, 2)
        state = make_selector("entropy", seed=0)
        for _ in range(40):
            assert select_entropy(matrix, state) in {(1, 3), (2, 3)}

    def test_deterministic_once_a_unique_maximum_exists(self):
        matrix = PreferenceMatrix.uniform(3)
        for winner, loser in [(1, 2), (1, 3), (3, 1), (1, 2)]:
            matrix = matrix.with_judgement(winner, loser)
        # pair (2, 3) is the only untouched cell, so every seed picks it
        for seed in range(20):
            state = make_selector("entropy", seed=seed)
            assert select_entropy(matrix, state) == (2, 3)

    def test_tie_tolerance_treats_equal_cells_as_candidates(self):
        # two pairs with identical records tie exactly; both must appear
        matrix = PreferenceMatrix.uniform(4)
        for winner, loser in [(1, 2), (3, 4)]:
            matrix = matrix.with_judgement(winner, loser)
        remaining = {(1, 3), (1, 4), (2, 3), (2, 4)}
        state = make_selector("entropy", seed=11)
        seen = {select_entropy(matrix, state) for _ in range(200)}
        assert seen == remaining
        assert ENTROPY_TIE_TOL < 1e-9

    def test_same_seed_same_stream(self):
        matrix = PreferenceMatrix.uniform(5)
        a = make_selector("entropy", seed=21)
        b = make_selector("entropy", seed=21)
        picks_a = [select_entropy(matrix, a) for _ in range(30)]
        picks_b = [select_entropy(matrix, b) for _ in range(30)]
        assert picks_a == picks_b


class TestSelectPair:
    def test_dispatches_by_kind(self):
        matrix = PreferenceMatrix.uniform(4)
        for kind in SELECTOR_KINDS:
            state = make_selector(kind, seed=0)
            pair = select_pair(state, matrix)
            assert 1 <= pair[0] < pair[1] <= 4

    def test_entropy_driven_judging_settles_the_posterior(self):
        # active selection should push the most uncertain cell down; by
        # the end of a generous budget the ceiling must have dropped
        endings = []
        for seed in range(20):
            matrix = PreferenceMatrix.uniform(5)
            state = make_selector("entropy", seed=seed)
            rng = np.random.default_rng(seed)
            start = max_entropy(matrix)
            for _ in range(50):
                i, j = select_pair(state, matrix)
                winner, loser = (i, j) if rng.random() < 0.7 else (j, i)
                matrix = matrix.with_judgement(winner, loser)
            endings.append(max_entropy(matrix) - start)
        assert float(np.median(endings)) < -0.2
        assert all(delta < 0.0 for delta in endings)
