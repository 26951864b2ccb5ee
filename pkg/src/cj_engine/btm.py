"""Classical Bradley-Terry baseline: MM maximum-likelihood fitting of a
positive score per item from pairwise win counts, and rank extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPairError, InvalidStateError

#: Pseudo-wins added symmetrically when the win graph cannot support an MLE.
SMOOTHING = 0.1

TOL_DEFAULT = 1e-8
MAX_ITERS_DEFAULT = 10_000


@dataclass
class BtmState:
    """Fitted (or in-progress) Bradley-Terry state.

    gamma is kept normalized to sum 1; omega[i, j] counts how often item
    i+1 beat item j+1. smoothed flags that pseudo-wins were required for
    the MLE to exist.
    """

    gamma: np.ndarray
    omega: np.ndarray
    iterations: int = 0
    converged: bool = False
    smoothed: bool = False
    likelihoods: list[float] = field(default_factory=list)


def btm_win_probability(state: BtmState, i: int, j: int) -> float:
    """P(i beats j) = gamma_i / (gamma_i + gamma_j)."""
    if i == j:
        raise InvalidPairError("an item cannot play itself")
    g = state.gamma
    return float(g[i - 1] / (g[i - 1] + g[j - 1]))


def btm_log_likelihood(state: BtmState) -> float:
    """Log-likelihood of the win counts under the current scores."""
    return _log_likelihood(state.gamma, state.omega)


def _log_likelihood(gamma: np.ndarray, omega: np.ndarray) -> float:
    if np.any(gamma <= 0):
        raise InvalidStateError("scores must be positive")
    pair_sums = gamma[:, None] + gamma[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = omega * (np.log(gamma)[:, None] - np.log(pair_sums))
    return float(np.where(omega > 0, terms, 0.0).sum())


def _strongly_connected(adj: np.ndarray) -> bool:
    """True when every item reaches every other along directed win edges."""
    n = adj.shape[0]
    if n <= 1:
        return True

    def reaches_all(matrix: np.ndarray) -> bool:
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            nxt = matrix[frontier].any(axis=0) & ~seen
            seen |= nxt
            frontier = list(np.flatnonzero(nxt))
        return bool(seen.all())

    return reaches_all(adj) and reaches_all(adj.T)


def btm_fit(
    omega: np.ndarray,
    max_iters: int = MAX_ITERS_DEFAULT,
    tol: float = TOL_DEFAULT,
    initial_gamma: np.ndarray | None = None,
    track_likelihood: bool = False,
) -> BtmState:
    """Fit scores by the MM update gamma_i <- W_i / sum_j (n_ij / (gamma_i + gamma_j)).

    When the win digraph is not strongly connected (items with zero wins
    or zero losses, never-compared items, disconnected components) the
    MLE does not exist; the fit then runs on a smoothed count matrix with
    0.1 pseudo-wins per compared pair, extended to all pairs if the graph
    is still disconnected, and the state is flagged.
    """
    omega = np.asarray(omega, dtype=float)
    n = omega.shape[0]
    if omega.shape != (n, n):
        raise InvalidStateError("win matrix must be square")
    if np.any(np.diag(omega) != 0):
        raise InvalidStateError("win matrix diagonal must be zero")

    smoothed = False
    fit_omega = omega
    if not _strongly_connected(omega > 0):
        smoothed = True
        compared = (omega + omega.T) > 0
        fit_omega = omega + SMOOTHING * compared
        if not _strongly_connected(fit_omega > 0):
            off_diag = ~np.eye(n, dtype=bool)
            fit_omega = omega + SMOOTHING * off_diag

    if initial_gamma is not None:
        gamma = np.asarray(initial_gamma, dtype=float).copy()
        gamma /= gamma.sum()
    else:
        gamma = np.full(n, 1.0 / n)

    state = BtmState(gamma=gamma, omega=omega, smoothed=smoothed)
    if n == 1:
        state.converged = True
        return state

    wins = fit_omega.sum(axis=1)
    totals = fit_omega + fit_omega.T
    off_diag = ~np.eye(n, dtype=bool)
    if track_likelihood:
        state.likelihoods.append(_log_likelihood(gamma, fit_omega))

    for iteration in range(1, max_iters + 1):
        pair_sums = gamma[:, None] + gamma[None, :]
        denom = np.where(off_diag, totals / pair_sums, 0.0).sum(axis=1)
        new_gamma = np.where(denom > 0, wins / np.where(denom > 0, denom, 1.0), gamma)
        new_gamma = np.clip(new_gamma, 1e-300, None)
        new_gamma /= new_gamma.sum()
        change = float(np.abs(new_gamma - gamma).max())
        gamma = new_gamma
        if track_likelihood:
            state.likelihoods.append(_log_likelihood(gamma, fit_omega))
        if change < tol:
            state.converged = True
            state.iterations = iteration
            break
    else:
        state.iterations = max_iters

    state.gamma = gamma
    return state


def btm_ranks(state: BtmState) -> np.ndarray:
    """Rank vector: rank 1 for the largest score, ties by ascending item id."""
    order = np.argsort(-state.gamma, kind="stable")
    ranks = np.empty(len(state.gamma), dtype=int)
    ranks[order] = np.arange(1, len(state.gamma) + 1)
    return ranks


def btm_scores_scaled(state: BtmState) -> np.ndarray:
    """Scores on the presentation scale (x100), applied only at reporting boundaries."""
    return state.gamma * 100.0
