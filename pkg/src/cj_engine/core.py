"""Bayesian preference posteriors over item pairs, rank distributions
(exact and Monte Carlo), expected ranks, and probabilistic grading.

Every pair (i, j) with i < j owns a Beta posterior over the probability
that i beats j; the upper triangle is authoritative and the lower
triangle follows by complement. Rank distributions come from the win
indicators: with q_t = P(i beats t), the number of wins w is
Poisson-binomial and the rank of i is N - w.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    InvalidPairError,
    InvalidPosteriorError,
    InvalidSchemeError,
    MustUseMonteCarloError,
    UnknownItemError,
    ValidationError,
)
from .special import beta_cdf_half

#: Largest N for which the exact rank-distribution path is served by default.
EXACT_THRESHOLD = 12

#: Default Monte Carlo sample count above the exactness threshold.
MC_SAMPLES_DEFAULT = 10_000


@dataclass(frozen=True)
class PreferenceCell:
    """Beta posterior over one pairwise preference probability.

    Shapes are derived from the win counts, so alpha = alpha_init + wins_i
    and beta = beta_init + wins_j hold by construction.
    """

    wins_i: int = 0
    wins_j: int = 0
    alpha_init: float = 1.0
    beta_init: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha_init <= 0 or self.beta_init <= 0:
            raise InvalidPosteriorError("prior shape parameters must be positive")
        if self.wins_i < 0 or self.wins_j < 0:
            raise InvalidPosteriorError("win counts cannot be negative")

    @property
    def alpha(self) -> float:
        return self.alpha_init + self.wins_i

    @property
    def beta(self) -> float:
        return self.beta_init + self.wins_j

    def with_win_for_i(self) -> "PreferenceCell":
        return replace(self, wins_i=self.wins_i + 1)

    def with_win_for_j(self) -> "PreferenceCell":
        return replace(self, wins_j=self.wins_j + 1)


def prob_preference(cell: PreferenceCell) -> float:
    """P(i beats j) = P(p > 0.5) = 1 - F(0.5) under the cell's Beta posterior."""
    if cell.alpha <= 0 or cell.beta <= 0:
        raise InvalidPosteriorError("posterior shape parameters must be positive")
    return 1.0 - beta_cdf_half(cell.alpha, cell.beta)


class PreferenceMatrix:
    """Upper-triangular collection of preference posteriors for N items.

    Instances are immutable snapshots: judgement updates return a new
    matrix sharing all unchanged cells. Item ids are 1-based.
    """

    __slots__ = ("n_items", "_cells")

    def __init__(self, n_items: int, cells: dict[tuple[int, int], PreferenceCell] | None = None):
        if n_items < 1:
            raise ValidationError("a preference matrix needs at least one item")
        self.n_items = n_items
        if cells is None:
            cells = {(i, j): PreferenceCell() for i in range(1, n_items + 1) for j in range(i + 1, n_items + 1)}
        self._cells = cells

    @classmethod
    def uniform(cls, n_items: int) -> "PreferenceMatrix":
        """Fresh matrix with every cell at the uniform Beta(1, 1) prior."""
        return cls(n_items)

    def _check_item(self, item: int) -> None:
        if not (1 <= item <= self.n_items):
            raise UnknownItemError(f"item {item} not in 1..{self.n_items}")

    def cell(self, i: int, j: int) -> PreferenceCell:
        """Cell for the unordered pair; (i, j) must satisfy i < j."""
        if i == j:
            raise InvalidPairError("no diagonal cells exist")
        self._check_item(i)
        self._check_item(j)
        if i > j:
            raise InvalidPairError(f"cell index must be upper-triangular, got ({i}, {j})")
        return self._cells[(i, j)]

    def pairs(self) -> Iterator[tuple[int, int]]:
        """All unordered pairs (i, j) with i < j, in row-major order."""
        for i in range(1, self.n_items + 1):
            for j in range(i + 1, self.n_items + 1):
                yield (i, j)

    def win_prob(self, i: int, j: int) -> float:
        """P(i beats j); lower-triangle queries return the exact complement."""
        if i == j:
            raise InvalidPairError("an item cannot be compared with itself")
        self._check_item(i)
        self._check_item(j)
        if i < j:
            return prob_preference(self._cells[(i, j)])
        return 1.0 - prob_preference(self._cells[(j, i)])

    def win_prob_matrix(self) -> np.ndarray:
        """Dense N x N array of win probabilities; diagonal is zero and unused."""
        n = self.n_items
        p = np.zeros((n, n))
        for (i, j), cell in self._cells.items():
            q = prob_preference(cell)
            p[i - 1, j - 1] = q
            p[j - 1, i - 1] = 1.0 - q
        return p

    def with_judgement(self, winner: int, loser: int) -> "PreferenceMatrix":
        """New snapshot with one win recorded; exactly one cell changes."""
        if winner == loser:
            raise InvalidPairError("winner and loser must differ")
        self._check_item(winner)
        self._check_item(loser)
        cells = dict(self._cells)
        if winner < loser:
            key = (winner, loser)
            cells[key] = cells[key].with_win_for_i()
        else:
            key = (loser, winner)
            cells[key] = cells[key].with_win_for_j()
        return PreferenceMatrix(self.n_items, cells)

    def to_json_dict(self) -> dict:
        """Documented serialization shape: {"n": N, "cells": [{i, j, alpha, beta}, ...]}."""
        return {
            "n": self.n_items,
            "cells": [
                {"i": i, "j": j, "alpha": cell.alpha, "beta": cell.beta}
                for (i, j), cell in sorted(self._cells.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PreferenceMatrix":
        n = int(data["n"])
        cells: dict[tuple[int, int], PreferenceCell] = {}
        for entry in data["cells"]:
            i, j = int(entry["i"]), int(entry["j"])
            if not (1 <= i < j <= n):
                raise ValidationError(f"cell ({i}, {j}) is not upper-triangular in 1..{n}")
            alpha, beta = float(entry["alpha"]), float(entry["beta"])
            cells[(i, j)] = PreferenceCell(wins_i=int(round(alpha - 1.0)), wins_j=int(round(beta - 1.0)))
        if len(cells) != n * (n - 1) // 2:
            raise ValidationError("matrix must carry exactly N(N-1)/2 cells")
        return cls(n, cells)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PreferenceMatrix)
            and self.n_items == other.n_items
            and self._cells == other._cells
        )


def update_posterior(matrix: PreferenceMatrix, winner: int, loser: int) -> PreferenceMatrix:
    """Record one judgement: the winner's side of the pair's Beta posterior gains a count."""
    return matrix.with_judgement(winner, loser)


@dataclass(frozen=True)
class RankDistribution:
    """Discrete probability distribution over the ranks 1..N of one item."""

    item: int
    probs: np.ndarray
    expected_rank: float
    method: str  # "exact" | "monte-carlo"
    mc_std_error: float | None = None

    def prob(self, rank: int) -> float:
        return float(self.probs[rank - 1])


def _win_probs_against(matrix: PreferenceMatrix, item: int) -> np.ndarray:
    """P(item beats t) for every opponent t, in ascending opponent order."""
    matrix._check_item(item)
    p = matrix.win_prob_matrix()
    row = p[item - 1]
    return np.delete(row, item - 1)


def rank_probs_from_win_probs(win_probs: Sequence[float]) -> np.ndarray:
    """Exact rank distribution given P(win) against each of N-1 opponents.

    The dynamic program over the win indicators is mathematically identical
    to summing over all dominant/dominated splits of the opponents, at
    polynomial instead of combinatorial cost.
    """
    # pmf[w] = P(the item wins exactly w of its duels)
    pmf = np.array([1.0])
    for qt in np.asarray(win_probs, dtype=float):
        pmf = np.convolve(pmf, [1.0 - qt, qt])
    return pmf[::-1]  # rank a corresponds to w = N - a wins


def mc_rank_distribution(
    item: int,
    win_probs: Sequence[float],
    samples: int = MC_SAMPLES_DEFAULT,
    seed: int | np.random.Generator = 0,
) -> RankDistribution:
    """Monte Carlo rank distribution given P(win) against each opponent.

    Each sample draws every duel as an independent Bernoulli win, counts
    the wins w' and records the rank N - w'. The standard error of the
    expected rank is sigma_s / sqrt(R).
    """
    if samples < 1:
        raise ValidationError("sample count must be at least 1")
    q = np.asarray(win_probs, dtype=float)
    n = len(q) + 1
    rng = np.random.default_rng(seed)
    wins = (rng.random((samples, n - 1)) < q).sum(axis=1) if n > 1 else np.zeros(samples, dtype=int)
    ranks = n - wins
    counts = np.bincount(ranks, minlength=n + 1)[1:]
    probs = counts / samples
    expected = float(ranks.mean())
    std_error = float(ranks.std(ddof=0) / np.sqrt(samples))
    return RankDistribution(
        item=item, probs=probs, expected_rank=expected, method="monte-carlo", mc_std_error=std_error
    )


def rank_distribution_exact(
    matrix: PreferenceMatrix, item: int, max_exact_n: int = EXACT_THRESHOLD
) -> RankDistribution:
    """Exact rank distribution of an item by Poisson-binomial convolution.

    Refuses N above the exactness threshold; use the Monte Carlo path there.
    """
    n = matrix.n_items
    if n > max_exact_n:
        raise MustUseMonteCarloError(
            f"exact enumeration is limited to N <= {max_exact_n}; use rank_distribution_mc for N = {n}"
        )
    probs = rank_probs_from_win_probs(_win_probs_against(matrix, item))
    expected = float(np.arange(1, n + 1) @ probs)
    return RankDistribution(item=item, probs=probs, expected_rank=expected, method="exact")


def rank_distribution_mc(
    matrix: PreferenceMatrix, item: int, samples: int = MC_SAMPLES_DEFAULT, seed: int = 0
) -> RankDistribution:
    """Monte Carlo estimate of an item's rank distribution under the matrix."""
    return mc_rank_distribution(item, _win_probs_against(matrix, item), samples, seed)


def rank_distributions(
    matrix: PreferenceMatrix,
    max_exact_n: int = EXACT_THRESHOLD,
    samples: int = MC_SAMPLES_DEFAULT,
    seed: int = 0,
) -> list[RankDistribution]:
    """Rank distributions for all items: exact up to the threshold, MC beyond."""
    if matrix.n_items <= max_exact_n:
        return [rank_distribution_exact(matrix, i, max_exact_n) for i in range(1, matrix.n_items + 1)]
    return [rank_distribution_mc(matrix, i, samples, seed + i) for i in range(1, matrix.n_items + 1)]


def expected_ranks(matrix: PreferenceMatrix) -> np.ndarray:
    """Exact expected rank of every item.

    E[r_i] = N - sum_t P(i beats t) by linearity over the win indicators,
    identical to the mean of the full rank distribution but O(N^2) overall,
    so it is exact at any N.
    """
    p = matrix.win_prob_matrix()
    return matrix.n_items - p.sum(axis=1)


def ranks_from_expected(values: Sequence[float]) -> np.ndarray:
    """Rank vector from expected ranks: rank 1 for the smallest, ties by item id."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=int)
    ranks[order] = np.arange(1, len(values) + 1)
    return ranks


def rank_all(
    matrix: PreferenceMatrix, samples: int | None = None, seed: int = 0
) -> np.ndarray:
    """Final rank vector (permutation of 1..N), rank 1 for the best item.

    Uses exact expected ranks unless a Monte Carlo sample count is
    requested explicitly; ties break by ascending item id.
    """
    if samples is None:
        values = expected_ranks(matrix)
    else:
        values = np.array(
            [rank_distribution_mc(matrix, i, samples, seed + i).expected_rank for i in range(1, matrix.n_items + 1)]
        )
    return ranks_from_expected(values)


@dataclass(frozen=True)
class GradingScheme:
    """Grade labels (best first) with per-grade item counts and the
    assessor's threshold of acceptability."""

    labels: tuple[str, ...]
    counts: tuple[int, ...]
    threshold: float = 0.9

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.counts) or not self.labels:
            raise InvalidSchemeError("labels and counts must be non-empty and aligned")
        if any(c <= 0 for c in self.counts):
            raise InvalidSchemeError("every grade must cover at least one item")
        if not (0.0 < self.threshold <= 1.0):
            raise InvalidSchemeError("threshold must lie in (0, 1]")

    @property
    def n_items(self) -> int:
        return sum(self.counts)

    def windows(self) -> list[tuple[int, int]]:
        """Contiguous rank windows [g, h] per grade, partitioning 1..N."""
        windows = []
        start = 1
        for count in self.counts:
            windows.append((start, start + count - 1))
            start += count
        return windows


def grade_probabilities(dist: RankDistribution, scheme: GradingScheme) -> np.ndarray:
    """P(grade) per grade label: the rank distribution summed over each window."""
    n = len(dist.probs)
    if scheme.n_items != n:
        raise InvalidSchemeError(
            f"grade counts sum to {scheme.n_items} but the distribution covers {n} ranks"
        )
    return np.array([float(dist.probs[g - 1 : h].sum()) for g, h in scheme.windows()])


def assign_grade(grade_probs: Sequence[float], scheme: GradingScheme) -> str:
    """First grade, walking best to worst, whose cumulative probability
    reaches the scheme's threshold of acceptability."""
    cumulative = 0.0
    for label, p in zip(scheme.labels, grade_probs):
        cumulative += float(p)
        if cumulative >= scheme.threshold - 1e-12:
            return label
    return scheme.labels[-1]  # cumulative reaches 1 by invariant; guard float loss
