"""Evaluation metrics: normalized Kendall tau distance, Jensen-Shannon
divergence between rank distributions, one-sided rank-sum tests, and the
Bonferroni-corrected beat count used to compare methods.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .core import RankDistribution
from .errors import (
    InvalidDistributionError,
    InvalidRankingError,
    PairingError,
    ValidationError,
)

#: Default number of rival methods for the Bonferroni correction.
BONFERRONI_M_DEFAULT = 5

#: Per-group size at and above which the rank-sum test switches to the
#: tie-corrected normal approximation.
RANK_SUM_EXACT_LIMIT = 20


def _check_ranking(ranks: Sequence[int], n: int) -> np.ndarray:
    arr = np.asarray(ranks)
    if arr.shape != (n,) or sorted(arr.tolist()) != list(range(1, n + 1)):
        raise InvalidRankingError(f"expected a permutation of 1..{n}, got {list(ranks)}")
    return arr


def _count_inversions(seq: list[int]) -> int:
    """Inversion count by merge sort, O(n log n)."""
    if len(seq) <= 1:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _count_inversions(left) + _count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
            count += len(left) - i
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return count


def kendall_tau_distance(rank_a: Sequence[int], rank_b: Sequence[int]) -> float:
    """Fraction of item pairs ordered differently by the two rankings.

    0 means identical orderings, 1 means exact reversal.
    """
    n = len(rank_a)
    if n < 2:
        raise InvalidRankingError("need at least two items to compare rankings")
    a = _check_ranking(rank_a, n)
    b = _check_ranking(rank_b, n)
    seq = b[np.argsort(a)].tolist()
    discordant = _count_inversions(seq)
    return discordant / (n * (n - 1) / 2)


def jsd(p: Sequence[float], q: Sequence[float]) -> float:
    """Jensen-Shannon divergence in bits between two distributions on the
    same support, with the 0 log 0 = 0 convention. Bounded by [0, 1].
    """
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if p_arr.shape != q_arr.shape or p_arr.ndim != 1:
        raise InvalidDistributionError("distributions must share one support")
    for arr in (p_arr, q_arr):
        if np.any(arr < 0) or abs(arr.sum() - 1.0) > 1e-6:
            raise InvalidDistributionError("probabilities must be non-negative and sum to 1")
    m = 0.5 * (p_arr + q_arr)

    def half(a: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / m[mask])))

    return 0.5 * half(p_arr) + 0.5 * half(q_arr)


def worst_jsd(
    estimates: Sequence[RankDistribution], targets: Sequence[RankDistribution]
) -> float:
    """Largest per-item JSD between estimated and target rank distributions."""
    if len(estimates) != len(targets):
        raise PairingError("estimate and target lists differ in length")
    by_item = {d.item: d for d in targets}
    worst = 0.0
    for est in estimates:
        if est.item not in by_item:
            raise PairingError(f"no target distribution for item {est.item}")
        worst = max(worst, jsd(est.probs, by_item[est.item].probs))
    return worst


def _midranks(combined: np.ndarray) -> np.ndarray:
    """Average ranks of a combined sample, shared across ties."""
    order = np.argsort(combined, kind="stable")
    ranks = np.empty(len(combined), dtype=float)
    sorted_vals = combined[order]
    i = 0
    while i < len(sorted_vals):
        j = i
        while j + 1 < len(sorted_vals) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _exact_upper_tail(doubled: list[int], n1: int, w2_obs: int) -> float:
    """P(doubled rank sum of a random n1-subset >= w2_obs), by counting."""
    total_choose = math.comb(len(doubled), n1)
    max_sum = sum(sorted(doubled)[-n1:])
    # table[c][s] = number of c-subsets of the processed prefix with doubled sum s
    table = np.zeros((n1 + 1, max_sum + 1))
    table[0][0] = 1.0
    for value in doubled:
        for c in range(min(n1, len(doubled)), 0, -1):
            table[c, value:] += table[c - 1, : max_sum + 1 - value]
    upper = table[n1, min(w2_obs, max_sum + 1) :].sum() if w2_obs <= max_sum else 0.0
    return float(upper) / total_choose


def rank_sum_pvalue(
    x: Sequence[float], y: Sequence[float], alternative: str = "greater"
) -> float:
    """One-sided rank-sum test p-value.

    alternative="greater" asks whether x tends to exceed y,
    alternative="less" the reverse. Small groups (both below
    RANK_SUM_EXACT_LIMIT) get the exact permutation distribution; larger
    ones get the tie-corrected normal approximation.
    """
    if alternative not in ("greater", "less"):
        raise ValidationError(f"unknown alternative {alternative!r}")
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    n1, n2 = len(x_arr), len(y_arr)
    if n1 < 1 or n2 < 1:
        raise ValidationError("both samples must be non-empty")
    if alternative == "less":
        return rank_sum_pvalue(y, x, alternative="greater")

    combined = np.concatenate([x_arr, y_arr])
    ranks = _midranks(combined)
    w = float(ranks[:n1].sum())
    n = n1 + n2

    if min(n1, n2) < RANK_SUM_EXACT_LIMIT:
        doubled = np.rint(2 * ranks).astype(int).tolist()
        w2_obs = int(round(2 * w))
        return _exact_upper_tail(doubled, n1, w2_obs)

    mean_w = n1 * (n + 1) / 2
    _, counts = np.unique(combined, return_counts=True)
    tie_term = float(np.sum(counts**3 - counts)) / (n * (n - 1))
    var_w = n1 * n2 / 12 * ((n + 1) - tie_term)
    if var_w <= 0:
        return 1.0
    z = (w - mean_w) / math.sqrt(var_w)
    return 0.5 * math.erfc(z / math.sqrt(2))


def beat_count(
    results: Mapping[str, Sequence[float]],
    alpha: float = 0.05,
    m: int | None = None,
) -> dict[str, int]:
    """Per-method count of rivals that beat it at Bonferroni-corrected
    significance. Scores are losses (lower is better), so method j beats
    method i when i's scores are significantly larger; V(i) near 0 marks
    a strong method.

    results maps method name to its per-repeat scores; all methods must
    supply the same number of repeats.
    """
    names = list(results)
    lengths = {len(results[name]) for name in names}
    if len(lengths) > 1:
        raise PairingError("all methods must report the same number of repeats")
    if m is None:
        m = max(len(names) - 1, 1)
    threshold = alpha / m
    counts: dict[str, int] = {}
    for name in names:
        beaten_by = 0
        for other in names:
            if other == name:
                continue
            p = rank_sum_pvalue(results[name], results[other], alternative="greater")
            if p <= threshold:
                beaten_by += 1
        counts[name] = beaten_by
    return counts
