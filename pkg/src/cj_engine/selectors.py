"""Pair-selection strategies: uniform random, no-repeating-pairs round
robin, and entropy-driven active learning over the preference posteriors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import PreferenceCell, PreferenceMatrix
from .errors import ConfigError, InvalidPosteriorError, NotEnoughItemsError
from .special import digamma, log_beta

SELECTOR_KINDS = ("random", "nrp", "entropy")

#: Cells whose entropy is within this absolute tolerance of the maximum tie.
ENTROPY_TIE_TOL = 1e-12


@lru_cache(maxsize=None)
def _beta_entropy(alpha: float, beta: float) -> float:
    # evaluate on the sorted shapes so symmetry holds to the last bit,
    # not merely up to floating-point summation order
    alpha, beta = sorted((alpha, beta))
    return float(
        log_beta(alpha, beta)
        - (alpha - 1.0) * digamma(alpha)
        - (beta - 1.0) * digamma(beta)
        + (alpha + beta - 2.0) * digamma(alpha + beta)
    )


def beta_entropy(cell: PreferenceCell) -> float:
    """Differential entropy of the cell's Beta posterior, in nats.

    Symmetric in (alpha, beta); zero at the uniform prior and strictly
    negative once any judgement lands on the pair.
    """
    if cell.alpha <= 0 or cell.beta <= 0:
        raise InvalidPosteriorError("posterior shape parameters must be positive")
    return _beta_entropy(cell.alpha, cell.beta)


def entropy_grid(matrix: PreferenceMatrix) -> np.ndarray:
    """Symmetric N x N grid of per-pair posterior entropies (diagonal NaN)."""
    n = matrix.n_items
    grid = np.full((n, n), np.nan)
    for i, j in matrix.pairs():
        h = beta_entropy(matrix.cell(i, j))
        grid[i - 1, j - 1] = h
        grid[j - 1, i - 1] = h
    return grid


def max_entropy(matrix: PreferenceMatrix) -> float:
    """Highest posterior entropy over all pairs."""
    return max(beta_entropy(matrix.cell(i, j)) for i, j in matrix.pairs())


@dataclass
class SelectorState:
    """Single-owner mutable state of one selection policy."""

    kind: str
    rng: np.random.Generator
    nrp_queue: list[tuple[int, int]] = field(default_factory=list)


def make_selector(kind: str, seed: int | None = None) -> SelectorState:
    """Selector state for one of the closed kinds: random | nrp | entropy."""
    if kind not in SELECTOR_KINDS:
        raise ConfigError(f"unknown selector kind {kind!r}; expected one of {SELECTOR_KINDS}")
    return SelectorState(kind=kind, rng=np.random.default_rng(seed))


def _all_pairs(n_items: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n_items + 1) for j in range(i + 1, n_items + 1)]


def _require_two(n_items: int) -> None:
    if n_items < 2:
        raise NotEnoughItemsError("pair selection needs at least two items")


def select_random(n_items: int, state: SelectorState) -> tuple[int, int]:
    """Unordered pair drawn uniformly over all C(N, 2) pairs; repeats allowed."""
    _require_two(n_items)
    pairs = _all_pairs(n_items)
    return pairs[state.rng.integers(len(pairs))]


def select_nrp(n_items: int, state: SelectorState) -> tuple[int, int]:
    """Round-robin pair: each unordered pair appears exactly once per round,
    round order is uniformly random, and an exhausted queue reshuffles."""
    _require_two(n_items)
    if not state.nrp_queue:
        queue = _all_pairs(n_items)
        state.rng.shuffle(queue)
        state.nrp_queue = queue
    return state.nrp_queue.pop()


def select_entropy(matrix: PreferenceMatrix, state: SelectorState) -> tuple[int, int]:
    """Pair whose posterior entropy is maximal; ties resolve uniformly at random."""
    _require_two(matrix.n_items)
    pairs = list(matrix.pairs())
    entropies = np.array([beta_entropy(matrix.cell(i, j)) for i, j in pairs])
    best = entropies.max()
    candidates = np.flatnonzero(entropies >= best - ENTROPY_TIE_TOL)
    return pairs[candidates[state.rng.integers(len(candidates))]]


def select_pair(state: SelectorState, matrix: PreferenceMatrix) -> tuple[int, int]:
    """Dispatch one selection against the current posterior snapshot."""
    if state.kind == "random":
        return select_random(matrix.n_items, state)
    if state.kind == "nrp":
        return select_nrp(matrix.n_items, state)
    return select_entropy(matrix, state)
