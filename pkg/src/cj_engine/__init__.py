"""Bayesian comparative judgement engine.

Beta posteriors over pairwise preferences, exact and Monte Carlo rank
distributions, entropy-driven pair selection, a Bradley-Terry baseline,
evaluation metrics, and a synthetic experiment harness. The session
service, CLI and figure rendering live in their own submodules
(cj_engine.service, cj_engine.cli, cj_engine.figures) so that importing
the math layer stays light.
"""

from .btm import (
    BtmState,
    btm_fit,
    btm_log_likelihood,
    btm_ranks,
    btm_scores_scaled,
    btm_win_probability,
)
from .core import (
    EXACT_THRESHOLD,
    MC_SAMPLES_DEFAULT,
    GradingScheme,
    PreferenceCell,
    PreferenceMatrix,
    RankDistribution,
    assign_grade,
    expected_ranks,
    grade_probabilities,
    mc_rank_distribution,
    prob_preference,
    rank_all,
    rank_distribution_exact,
    rank_distribution_mc,
    rank_distributions,
    rank_probs_from_win_probs,
    ranks_from_expected,
    update_posterior,
)
from .errors import (
    CjError,
    ConfigError,
    ConflictError,
    InvalidDistributionError,
    InvalidPairError,
    InvalidPosteriorError,
    InvalidRankingError,
    InvalidSchemeError,
    InvalidStateError,
    MustUseMonteCarloError,
    NotEnoughItemsError,
    NotFoundError,
    PairingError,
    UnknownItemError,
    ValidationError,
)
from .metrics import beat_count, jsd, kendall_tau_distance, rank_sum_pvalue, worst_jsd
from .selectors import (
    ENTROPY_TIE_TOL,
    SELECTOR_KINDS,
    SelectorState,
    beta_entropy,
    entropy_grid,
    make_selector,
    max_entropy,
    select_entropy,
    select_nrp,
    select_pair,
    select_random,
)
from .sim import (
    METHOD_LABELS,
    ExperimentConfig,
    ExperimentResult,
    StepRecord,
    SummaryRecord,
    TargetPopulation,
    analyze_experiment,
    run_experiment,
    run_grid,
    simulate_duel,
    target_domination_prob,
    target_expected_ranks,
    target_rank_distributions,
    target_ranks,
    target_win_matrix,
    write_manifest,
    write_steps_csv,
    write_summary_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BtmState",
    "CjError",
    "ConfigError",
    "ConflictError",
    "ENTROPY_TIE_TOL",
    "EXACT_THRESHOLD",
    "ExperimentConfig",
    "ExperimentResult",
    "GradingScheme",
    "InvalidDistributionError",
    "InvalidPairError",
    "InvalidPosteriorError",
    "InvalidRankingError",
    "InvalidSchemeError",
    "InvalidStateError",
    "MC_SAMPLES_DEFAULT",
    "METHOD_LABELS",
    "MustUseMonteCarloError",
    "NotEnoughItemsError",
    "NotFoundError",
    "PairingError",
    "PreferenceCell",
    "PreferenceMatrix",
    "RankDistribution",
    "SELECTOR_KINDS",
    "SelectorState",
    "StepRecord",
    "SummaryRecord",
    "TargetPopulation",
    "UnknownItemError",
    "ValidationError",
    "analyze_experiment",
    "assign_grade",
    "beat_count",
    "beta_entropy",
    "btm_fit",
    "btm_log_likelihood",
    "btm_ranks",
    "btm_scores_scaled",
    "btm_win_probability",
    "entropy_grid",
    "expected_ranks",
    "grade_probabilities",
    "jsd",
    "kendall_tau_distance",
    "make_selector",
    "max_entropy",
    "mc_rank_distribution",
    "prob_preference",
    "rank_all",
    "rank_distribution_exact",
    "rank_distribution_mc",
    "rank_distributions",
    "rank_probs_from_win_probs",
    "rank_sum_pvalue",
    "ranks_from_expected",
    "run_experiment",
    "run_grid",
    "select_entropy",
    "select_nrp",
    "select_pair",
    "select_random",
    "simulate_duel",
    "target_domination_prob",
    "target_expected_ranks",
    "target_rank_distributions",
    "target_ranks",
    "target_win_matrix",
    "update_posterior",
    "worst_jsd",
    "write_manifest",
    "write_steps_csv",
    "write_summary_csv",
]
