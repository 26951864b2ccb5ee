/**
 * Payload shapes for the comparative-judgement service's /v1 API.
 *
 * Every number shown in the UI comes from one of these fields; the client
 * renders them verbatim and never derives statistics of its own.
 */

/** An item as embedded in session and pair payloads. */
export interface ItemRef {
  /** Stable numeric identifier, unique within the session. */
  id: number;
  /** Human-readable label shown on cards and axes. */
  label: string;
  /** Optional URI of the item's content (text, image, PDF). */
  content_ref: string | null;
}

/** Session metadata as returned by create/fetch endpoints. */
export interface SessionInfo {
  id: string;
  items: ItemRef[];
  /** Pair-selection policy the service is running. */
  selector: string;
  /** Budget multiplier: the session targets k judgements per item. */
  k: number;
  /** Total judgement budget for the session. */
  budget: number;
  /** Number of judgements recorded so far. */
  judgements: number;
  status: string;
  budget_exceeded: boolean;
  created_at: string;
}

/** A served pair awaiting exactly one judgement. */
export interface PendingPair {
  left: ItemRef;
  right: ItemRef;
  /** Judgement count at the moment the pair was served. */
  step: number;
  /** Posterior entropy of the pair, in nats; 0 is maximal uncertainty. */
  entropy: number;
  /** Posterior probability that the left item beats the right one. */
  prob_left: number;
  status: string;
  budget_exceeded: boolean;
}

/** Acknowledgement returned after a judgement is recorded. */
export interface JudgementAck {
  /** Judgement count after recording, i.e. the new progress value. */
  step: number;
  expected_ranks: ExpectedRank[];
  /** Highest pairwise entropy remaining in the session. */
  max_entropy: number;
  status: string;
  budget_exceeded: boolean;
}

/** Expected rank of one item under the current posterior. */
export interface ExpectedRank {
  item: number;
  expected_rank: number;
}

/** One row of the ranking table. */
export interface RankRow {
  item: number;
  label: string;
  rank: number;
  expected_rank: number;
}

/** Posterior rank distribution of one item. */
export interface RankDistributionRow {
  item: number;
  /** probs[r - 1] is the probability of holding rank r. */
  probs: number[];
  expected_rank: number;
  /** How the distribution was computed (exact enumeration or sampling). */
  method: string;
  mc_std_error: number | null;
}

/** Pairwise-entropy summary of the session. */
export interface EntropySection {
  /** Symmetric grid of pair entropies; the diagonal is null. */
  grid: (number | null)[][];
  /** Largest entry of the grid. */
  max: number;
  /** Max-entropy trajectory: the starting state, then one value per judgement. */
  series: number[];
}

/** Beta density of a pair posterior, sampled on a uniform grid. */
export interface DensityCurve {
  x: number[];
  pdf: number[];
}

/** Report section describing the currently served pair, if any. */
export interface PendingSection {
  left: number;
  right: number;
  entropy: number;
  prob_left: number;
  density: DensityCurve;
}

/** Full session report driving every insight view. */
export interface SessionReport {
  session: SessionInfo;
  ranks: RankRow[];
  distributions: RankDistributionRow[];
  entropy: EntropySection;
  pending: PendingSection | null;
  btm?: unknown;
}

/** A grading scheme to post: ordered labels with seat counts. */
export interface GradeScheme {
  /** Grade labels, best first. */
  labels: string[];
  /** Seats per grade; must sum to the number of items. */
  counts: number[];
  /** Cumulative-probability threshold in (0, 1] for assignment. */
  threshold: number;
}

/** Grade probabilities and assignment for one item. */
export interface GradeRow {
  item: number;
  label: string;
  /** Probability of landing in each grade's rank window. */
  probs: Record<string, number>;
  /** Grade assigned under the posted threshold. */
  assigned: string;
}

/** Response of the grading endpoint. */
export interface GradeReport {
  labels: string[];
  counts: number[];
  threshold: number;
  grades: GradeRow[];
}

/** Uniform error body returned by every endpoint. */
export interface ErrorBody {
  code: string;
  message: string;
  detail: unknown;
}
