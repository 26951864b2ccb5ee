"""Synthetic experiment harness: Normal score targets, duel simulation,
ground-truth rank distributions, and the six-method convergence grid
(BTM and BCJ ranking, each under random, round-robin and entropy-driven
pair selection).
"""

from __future__ import annotations

import csv
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib.metadata import PackageNotFoundError, version
from statistics import median
from typing import Sequence

import numpy as np

from .btm import btm_fit, btm_ranks
from .core import (
    EXACT_THRESHOLD,
    MC_SAMPLES_DEFAULT,
    PreferenceMatrix,
    RankDistribution,
    expected_ranks,
    mc_rank_distribution,
    rank_probs_from_win_probs,
    ranks_from_expected,
    update_posterior,
)
from .errors import ConfigError, InvalidPairError, UnknownItemError, ValidationError
from .metrics import beat_count, kendall_tau_distance, worst_jsd
from .selectors import make_selector, select_pair

#: The six method labels: ranking model x pair-selection policy.
METHOD_LABELS = (
    "btm-random",
    "btm-nrp",
    "btm-entropy",
    "bcj-random",
    "bcj-nrp",
    "bcj-entropy",
)

SCORE_LOW = 30.0
SCORE_HIGH = 90.0
SIGMA_DEFAULT = 5.0

STEPS_COLUMNS = ("method", "n", "k", "repeat", "step", "tau_distance", "worst_jsd")
SUMMARY_COLUMNS = ("n", "k", "method", "median_tau", "v_count")


@dataclass(frozen=True, eq=False)
class TargetPopulation:
    """Ground-truth scoring model: item i's quality is Normal(means[i-1], sigma)."""

    means: np.ndarray
    sigma: float = SIGMA_DEFAULT
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        if self.sigma <= 0:
            raise ValidationError("score noise must be positive")
        if self.means.ndim != 1 or not np.all(np.isfinite(self.means)):
            raise ValidationError("means must be a finite vector")

    @property
    def n_items(self) -> int:
        return len(self.means)

    @classmethod
    def sample(
        cls,
        n_items: int,
        seed: int | np.random.Generator | np.random.SeedSequence | None = None,
        sigma: float = SIGMA_DEFAULT,
        low: float = SCORE_LOW,
        high: float = SCORE_HIGH,
    ) -> "TargetPopulation":
        """Population with means drawn uniformly on [low, high]."""
        rng = np.random.default_rng(seed)
        means = rng.uniform(low, high, n_items)
        return cls(means=means, sigma=sigma, seed=seed if isinstance(seed, int) else None)

    def _check_item(self, item: int) -> None:
        if not (1 <= item <= self.n_items):
            raise UnknownItemError(f"item {item} not in 1..{self.n_items}")


def target_domination_prob(pop: TargetPopulation, i: int, j: int) -> float:
    """P(a draw for i exceeds a draw for j) under the Normal score model.

    The difference of the two draws is Normal with mean mu_i - mu_j and
    variance 2 sigma^2, so the probability is (1 + erf(m / sqrt 2)) / 2
    with m the standardized mean difference.
    """
    if i == j:
        raise InvalidPairError("an item cannot dominate itself")
    pop._check_item(i)
    pop._check_item(j)
    m = (pop.means[i - 1] - pop.means[j - 1]) / math.sqrt(2 * pop.sigma**2)
    return 0.5 * (1.0 + math.erf(m / math.sqrt(2)))


def target_win_matrix(pop: TargetPopulation) -> np.ndarray:
    """Dense N x N matrix of domination probabilities; diagonal is zero."""
    n = pop.n_items
    p = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            q = target_domination_prob(pop, i, j)
            p[i - 1, j - 1] = q
            p[j - 1, i - 1] = 1.0 - q
    return p


def target_expected_ranks(pop: TargetPopulation) -> np.ndarray:
    """Exact expected ranks under the ground-truth domination probabilities."""
    p = target_win_matrix(pop)
    return pop.n_items - p.sum(axis=1)


def target_ranks(pop: TargetPopulation) -> np.ndarray:
    """Ground-truth rank vector: sort items by target expected rank."""
    return ranks_from_expected(target_expected_ranks(pop))


def target_rank_distributions(
    pop: TargetPopulation,
    max_exact_n: int = EXACT_THRESHOLD,
    samples: int = MC_SAMPLES_DEFAULT,
    seed: int = 0,
) -> list[RankDistribution]:
    """Ground-truth rank distribution per item, exact up to the threshold."""
    n = pop.n_items
    p = target_win_matrix(pop)
    dists = []
    for item in range(1, n + 1):
        q = np.delete(p[item - 1], item - 1)
        if n <= max_exact_n:
            probs = rank_probs_from_win_probs(q)
            expected = float(np.arange(1, n + 1) @ probs)
            dists.append(
                RankDistribution(item=item, probs=probs, expected_rank=expected, method="exact")
            )
        else:
            dists.append(mc_rank_distribution(item, q, samples, seed + item))
    return dists


def simulate_duel(pop: TargetPopulation, i: int, j: int, rng: np.random.Generator) -> int:
    """One simulated comparison: whichever item draws the higher score wins."""
    if i == j:
        raise InvalidPairError("a duel needs two distinct items")
    pop._check_item(i)
    pop._check_item(j)
    score_i = rng.normal(pop.means[i - 1], pop.sigma)
    score_j = rng.normal(pop.means[j - 1], pop.sigma)
    return i if score_i > score_j else j


@dataclass(frozen=True)
class ExperimentConfig:
    """One cell of the experiment grid: N items judged under budget B = N*K."""

    n_items: int
    k_multiplier: int
    repeats: int = 50
    methods: tuple[str, ...] = METHOD_LABELS
    seed: int = 0
    sigma: float = SIGMA_DEFAULT
    mc_samples: int = MC_SAMPLES_DEFAULT
    max_exact_n: int = EXACT_THRESHOLD
    jsd_stride: int = 1

    def __post_init__(self) -> None:
        if self.n_items < 2:
            raise ConfigError("experiments need at least two items")
        if self.k_multiplier < 1 or self.repeats < 1 or self.jsd_stride < 1:
            raise ConfigError("k, repeats and jsd stride must be positive")
        unknown = [m for m in self.methods if m not in METHOD_LABELS]
        if unknown or not self.methods:
            raise ConfigError(f"unknown method labels {unknown}; expected among {METHOD_LABELS}")

    @property
    def budget(self) -> int:
        return self.n_items * self.k_multiplier


@dataclass(frozen=True)
class StepRecord:
    """One row of the per-step convergence log."""

    method: str
    n: int
    k: int
    repeat: int
    step: int
    tau_distance: float
    worst_jsd: float | None = None


@dataclass(frozen=True)
class SummaryRecord:
    """One row of the per-cell summary: median final tau and beat count."""

    n: int
    k: int
    method: str
    median_tau: float
    v_count: int


@dataclass
class ExperimentResult:
    """Full outcome of one grid cell: step log plus final tau per repeat."""

    config: ExperimentConfig
    steps: list[StepRecord] = field(default_factory=list)
    final_taus: dict[str, list[float]] = field(default_factory=dict)


def _estimate_distributions(
    matrix: PreferenceMatrix, config: ExperimentConfig, jsd_rng: np.random.Generator
) -> list[RankDistribution]:
    n = matrix.n_items
    if n <= config.max_exact_n:
        p = matrix.win_prob_matrix()
        dists = []
        for item in range(1, n + 1):
            q = np.delete(p[item - 1], item - 1)
            probs = rank_probs_from_win_probs(q)
            expected = float(np.arange(1, n + 1) @ probs)
            dists.append(
                RankDistribution(item=item, probs=probs, expected_rank=expected, method="exact")
            )
        return dists
    p = matrix.win_prob_matrix()
    return [
        mc_rank_distribution(item, np.delete(p[item - 1], item - 1), config.mc_samples, jsd_rng)
        for item in range(1, n + 1)
    ]


def _run_method(
    label: str,
    config: ExperimentConfig,
    repeat: int,
    pop: TargetPopulation,
    true_ranks: np.ndarray,
    true_dists: list[RankDistribution] | None,
    duel_seed: np.random.SeedSequence,
    selector_seed: np.random.SeedSequence,
    jsd_seed: np.random.SeedSequence,
) -> tuple[list[StepRecord], float]:
    model, selector_kind = label.split("-", 1)
    duel_rng = np.random.default_rng(duel_seed)
    jsd_rng = np.random.default_rng(jsd_seed)
    selector = make_selector(selector_kind, seed=selector_seed)
    n, budget = config.n_items, config.budget

    matrix = PreferenceMatrix.uniform(n)
    omega = np.zeros((n, n))
    gamma = np.full(n, 1.0 / n)
    rows: list[StepRecord] = []
    tau = 1.0
    for step in range(1, budget + 1):
        i, j = select_pair(selector, matrix)
        winner = simulate_duel(pop, i, j, duel_rng)
        loser = j if winner == i else i
        matrix = update_posterior(matrix, winner, loser)
        jsd_value = None
        if model == "bcj":
            tau = float(kendall_tau_distance(ranks_from_expected(expected_ranks(matrix)), true_ranks))
            if true_dists is not None and (step % config.jsd_stride == 0 or step == budget):
                jsd_value = float(worst_jsd(_estimate_distributions(matrix, config, jsd_rng), true_dists))
        else:
            omega[winner - 1, loser - 1] += 1
            state = btm_fit(omega, initial_gamma=gamma)
            gamma = state.gamma
            tau = float(kendall_tau_distance(btm_ranks(state), true_ranks))
        rows.append(
            StepRecord(
                method=label,
                n=n,
                k=config.k_multiplier,
                repeat=repeat,
                step=step,
                tau_distance=tau,
                worst_jsd=jsd_value,
            )
        )
    return rows, tau


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run one grid cell: every method judges B = N*K simulated duels per
    repeat, with seeds paired across methods within each repeat.

    The step log records the tau distance to the ground-truth ranking
    after every judgement and, for the Bayesian model, the worst per-item
    JSD against the ground-truth rank densities.
    """
    result = ExperimentResult(config=config, final_taus={m: [] for m in config.methods})
    track_jsd = any(label.startswith("bcj") for label in config.methods)
    for repeat in range(1, config.repeats + 1):
        root = np.random.SeedSequence(
            [config.seed, config.n_items, config.k_multiplier, repeat]
        )
        pop_seed, duel_seed, selector_seed, jsd_seed = root.spawn(4)
        pop = TargetPopulation.sample(config.n_items, seed=pop_seed, sigma=config.sigma)
        true_ranks = target_ranks(pop)
        true_dists = None
        if track_jsd:
            target_seed = int(jsd_seed.generate_state(1)[0] >> 1)
            true_dists = target_rank_distributions(
                pop, config.max_exact_n, config.mc_samples, seed=target_seed
            )
        for label in config.methods:
            rows, final_tau = _run_method(
                label,
                config,
                repeat,
                pop,
                true_ranks,
                true_dists if label.startswith("bcj") else None,
                duel_seed,
                selector_seed,
                jsd_seed,
            )
            result.steps.extend(rows)
            result.final_taus[label].append(final_tau)
    return result


def run_grid(configs: Sequence[ExperimentConfig], jobs: int = 1) -> list[ExperimentResult]:
    """Run several grid cells, optionally across worker processes.

    Cells are independent; results come back in input order regardless of
    worker scheduling, so output files stay deterministic.
    """
    if jobs <= 1 or len(configs) <= 1:
        return [run_experiment(config) for config in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_experiment, configs))


def analyze_experiment(
    results: Sequence[ExperimentResult],
    expected_grid: Sequence[tuple[int, int]] | None = None,
) -> list[SummaryRecord]:
    """Per-cell summary: median final tau per method and the count of
    rival methods that beat it under the Bonferroni-corrected rank-sum test.
    """
    seen = {(r.config.n_items, r.config.k_multiplier) for r in results}
    if expected_grid is not None:
        missing = [cell for cell in expected_grid if tuple(cell) not in seen]
        if missing:
            raise ConfigError(f"grid is missing cells {missing}")
    rows: list[SummaryRecord] = []
    for result in sorted(results, key=lambda r: (r.config.n_items, r.config.k_multiplier)):
        counts = beat_count(result.final_taus)
        for label in result.config.methods:
            rows.append(
                SummaryRecord(
                    n=result.config.n_items,
                    k=result.config.k_multiplier,
                    method=label,
                    median_tau=float(median(result.final_taus[label])),
                    v_count=counts[label],
                )
            )
    return rows


def _format_value(value: float | int | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_steps_csv(path: str, steps: Sequence[StepRecord]) -> None:
    """Step log as RFC-4180 CSV with a fixed column order."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(STEPS_COLUMNS)
        for row in steps:
            writer.writerow(
                [
                    row.method,
                    row.n,
                    row.k,
                    row.repeat,
                    row.step,
                    _format_value(row.tau_distance),
                    _format_value(row.worst_jsd),
                ]
            )


def write_summary_csv(path: str, rows: Sequence[SummaryRecord]) -> None:
    """Per-cell summary as RFC-4180 CSV with a fixed column order."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow(
                [row.n, row.k, row.method, _format_value(row.median_tau), row.v_count]
            )


def write_manifest(path: str, configs: Sequence[ExperimentConfig]) -> None:
    """Reproducibility manifest: configs (including seeds) plus versions."""
    try:
        pkg_version = version("cj-engine")
    except PackageNotFoundError:
        pkg_version = "unknown"
    payload = {
        "package": "cj-engine",
        "version": pkg_version,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "configs": [asdict(config) | {"budget": config.budget} for config in configs],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
