/**
 * In-memory stand-in for the /v1 service used by the panel tests.
 *
 * The fake mirrors the real payload shapes, enforces the one-judgement-per-
 * served-pair contract with 409 conflicts, and counts every request so tests
 * can assert that no judgement is ever submitted twice.
 */

import type {
  GradeScheme,
  ItemRef,
  PendingSection,
  SessionInfo,
  SessionReport,
} from '../src/types.js';

/** Rank-probability rows item 3 flips between grades on: B at 0.90, C at 0.95. */
export const FLIP_ITEM_PROBS = [0.1563, 0.768, 0.0757, 0.0, 0.0];

/** Tuning knobs for a {@link FakeServer}. */
export interface FakeServerOptions {
  nItems?: number;
  k?: number;
  /** Bearer token to require on every request, if any. */
  requireToken?: string;
  /** Per-item rank probabilities backing the grades endpoint. */
  gradeTables?: Map<number, number[]>;
}

interface PendingPairState {
  left: number;
  right: number;
}

/** Deterministic five-item rank table: point mass except for item 3. */
export function defaultGradeTables(nItems: number): Map<number, number[]> {
  const tables = new Map<number, number[]>();
  for (let item = 1; item <= nItems; item += 1) {
    if (item === 3 && nItems >= 5) {
      tables.set(item, [...FLIP_ITEM_PROBS]);
    } else {
      const probs = new Array<number>(nItems).fill(0);
      probs[item - 1] = 1;
      tables.set(item, probs);
    }
  }
  return tables;
}

/** Scriptable fake of the comparative-judgement service. */
export class FakeServer {
  readonly items: ItemRef[];
  readonly budget: number;

  /** Judgement POSTs that reached the server, accepted or not. */
  judgementPosts = 0;
  /** Judgements actually recorded. */
  judgementsRecorded = 0;
  /** Judgement POSTs rejected as stale-pair conflicts. */
  conflicts = 0;
  gradePosts = 0;
  reportGets = 0;
  pairGets = 0;

  /** Reject the next judgement POST before it reaches the server. */
  failNextSubmit = false;
  /** Record the next judgement but lose the response on the way back. */
  dropNextSubmitResponse = false;
  /** Reject the next next-pair request. */
  failNextPair = false;
  /** Reject the next report request. */
  failNextReport = false;

  private pending: PendingPairState | null = null;
  private readonly combos: PendingPairState[] = [];
  private comboCursor = 0;
  private readonly requireToken: string | null;
  private readonly gradeTables: Map<number, number[]>;

  constructor(options: FakeServerOptions = {}) {
    const nItems = options.nItems ?? 5;
    const k = options.k ?? 2;
    this.items = Array.from({ length: nItems }, (_, index) => ({
      id: index + 1,
      label: `essay ${index + 1}`,
      content_ref: null,
    }));
    this.budget = nItems * k;
    this.requireToken = options.requireToken ?? null;
    this.gradeTables = options.gradeTables ?? defaultGradeTables(nItems);
    for (let i = 1; i <= nItems; i += 1) {
      for (let j = i + 1; j <= nItems; j += 1) {
        this.combos.push({ left: i, right: j });
      }
    }
  }

  /** fetch-compatible entry point to hand to an ApiClient. */
  readonly fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = new URL(String(input), 'http://fake');
    const method = init?.method ?? 'GET';
    const body = typeof init?.body === 'string' ? (JSON.parse(init.body) as unknown) : null;
    if (this.requireToken !== null) {
      const headers = new Headers(init?.headers);
      if (headers.get('authorization') !== `Bearer ${this.requireToken}`) {
        return json(401, { code: 'unauthorized', message: 'missing or invalid token', detail: null });
      }
    }
    return this.route(method, url.pathname, body);
  };

  /**
   * Records a judgement behind the UI's back, as a second tab would.
   * The served pair is consumed, so the UI's next submission conflicts.
   */
  externalJudgement(): void {
    if (this.pending !== null) {
      this.judgementsRecorded += 1;
      this.pending = null;
    }
  }

  private route(method: string, path: string, body: unknown): Promise<Response> | Response {
    if (method === 'GET' && path === '/v1/health') {
      return json(200, { status: 'ok' });
    }
    if (method === 'POST' && path === '/v1/sessions') {
      return json(201, this.sessionInfo());
    }
    if (method === 'GET' && path === '/v1/sessions/s1') {
      return json(200, this.sessionInfo());
    }
    if (method === 'GET' && path === '/v1/sessions/s1/next-pair') {
      return this.handleNextPair();
    }
    if (method === 'POST' && path === '/v1/sessions/s1/judgements') {
      return this.handleJudgement(body as { left: number; right: number; winner: number });
    }
    if (method === 'GET' && path === '/v1/sessions/s1/report') {
      return this.handleReport();
    }
    if (method === 'POST' && path === '/v1/sessions/s1/grades') {
      return this.handleGrades(body as GradeScheme);
    }
    return json(404, { code: 'not_found', message: `no route for ${method} ${path}`, detail: null });
  }

  private handleNextPair(): Response {
    this.pairGets += 1;
    if (this.failNextPair) {
      this.failNextPair = false;
      throw new TypeError('network failure');
    }
    if (this.pending === null) {
      this.pending = this.combos[this.comboCursor % this.combos.length]!;
      this.comboCursor += 1;
    }
    const left = this.items[this.pending.left - 1]!;
    const right = this.items[this.pending.right - 1]!;
    return json(200, {
      left,
      right,
      step: this.judgementsRecorded,
      entropy: -0.01 * this.judgementsRecorded,
      prob_left: 0.5,
      status: 'active',
      budget_exceeded: this.judgementsRecorded >= this.budget,
    });
  }

  private handleJudgement(body: { left: number; right: number; winner: number }): Response {
    if (this.failNextSubmit) {
      this.failNextSubmit = false;
      throw new TypeError('network failure');
    }
    this.judgementPosts += 1;
    if (
      this.pending === null ||
      body.left !== this.pending.left ||
      body.right !== this.pending.right
    ) {
      this.conflicts += 1;
      return json(409, {
        code: 'conflict',
        message: 'judgement does not match the pending pair',
        detail: { pending: this.pending },
      });
    }
    if (body.winner !== body.left && body.winner !== body.right) {
      return json(400, { code: 'invalid', message: 'winner must be one of the pair', detail: null });
    }
    this.judgementsRecorded += 1;
    this.pending = null;
    if (this.dropNextSubmitResponse) {
      this.dropNextSubmitResponse = false;
      throw new TypeError('network failure');
    }
    return json(200, {
      step: this.judgementsRecorded,
      expected_ranks: this.items.map((item) => ({
        item: item.id,
        expected_rank: (this.items.length + 1) / 2,
      })),
      max_entropy: -0.01 * this.judgementsRecorded,
      status: 'active',
      budget_exceeded: this.judgementsRecorded >= this.budget,
    });
  }

  private handleReport(): Response {
    this.reportGets += 1;
    if (this.failNextReport) {
      this.failNextReport = false;
      throw new TypeError('network failure');
    }
    return json(200, this.report());
  }

  private handleGrades(scheme: GradeScheme): Response {
    this.gradePosts += 1;
    if (scheme.counts.reduce((sum, count) => sum + count, 0) !== this.items.length) {
      return json(422, { code: 'invalid', message: 'counts must sum to the item count', detail: null });
    }
    const grades = this.items.map((item) => {
      const table = this.gradeTables.get(item.id) ?? [];
      const probs: Record<string, number> = {};
      let offset = 0;
      for (const [index, label] of scheme.labels.entries()) {
        let mass = 0;
        for (let rank = offset + 1; rank <= offset + (scheme.counts[index] ?? 0); rank += 1) {
          mass += table[rank - 1] ?? 0;
        }
        probs[label] = mass;
        offset += scheme.counts[index] ?? 0;
      }
      let cumulative = 0;
      let assigned = scheme.labels[scheme.labels.length - 1] ?? '';
      for (const label of scheme.labels) {
        cumulative += probs[label] ?? 0;
        if (cumulative >= scheme.threshold - 1e-9) {
          assigned = label;
          break;
        }
      }
      return { item: item.id, label: item.label, probs, assigned };
    });
    return json(200, {
      labels: scheme.labels,
      counts: scheme.counts,
      threshold: scheme.threshold,
      grades,
    });
  }

  private sessionInfo(): SessionInfo {
    return {
      id: 's1',
      items: this.items,
      selector: 'entropy',
      k: this.budget / this.items.length,
      budget: this.budget,
      judgements: this.judgementsRecorded,
      status: 'active',
      budget_exceeded: this.judgementsRecorded >= this.budget,
      created_at: '2026-08-23T00:00:00Z',
    };
  }

  private report(): SessionReport {
    const n = this.items.length;
    const uniform = new Array<number>(n).fill(1 / n);
    let pendingSection: PendingSection | null = null;
    if (this.pending !== null) {
      pendingSection = {
        left: this.pending.left,
        right: this.pending.right,
        entropy: -0.05,
        prob_left: 0.5,
        density: { x: [0, 0.25, 0.5, 0.75, 1], pdf: [1, 1, 1, 1, 1] },
      };
    }
    return {
      session: this.sessionInfo(),
      ranks: this.items.map((item, index) => ({
        item: item.id,
        label: item.label,
        rank: index + 1,
        expected_rank: (n + 1) / 2,
      })),
      distributions: this.items.map((item) => ({
        item: item.id,
        probs: [...uniform],
        expected_rank: (n + 1) / 2,
        method: 'exact',
        mc_std_error: null,
      })),
      entropy: {
        grid: this.items.map((_, i) =>
          this.items.map((__, j) => (i === j ? null : -0.05)),
        ),
        max: -0.05,
        series: Array.from({ length: this.judgementsRecorded + 1 }, (_, index) => -0.01 * index),
      },
      pending: pendingSection,
    };
  }
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

/** Lets queued promise callbacks and follow-up fetches settle. */
export function flushAsync(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
