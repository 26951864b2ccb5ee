/**
 * The judging loop: show the served pair side by side, record the clicked
 * winner, and immediately move on to the next pair.
 *
 * The panel guarantees at most one judgement per served pair. Clicks are
 * ignored while a submission is in flight, a stale-pair conflict silently
 * refreshes the pair, and a network failure surfaces a retry banner instead
 * of resubmitting on its own.
 */

import { ApiClient, ApiError } from './api.js';
import { contentMedia, el } from './dom.js';
import type { JudgementAck, PendingPair, SessionInfo } from './types.js';

/** Callbacks the surrounding app can hook into. */
export interface JudgingEvents {
  /** Fired after the service acknowledges a judgement. */
  onJudged?: (ack: JudgementAck) => void;
}

/** Side-by-side judging panel bound to one session. */
export class JudgingPanel {
  private readonly client: ApiClient;
  private readonly sessionId: string;
  private readonly events: JudgingEvents;

  private pair: PendingPair | null = null;
  private busy = false;
  private retryAction: (() => Promise<void>) | null = null;
  private judgements = 0;
  private budget = 0;

  private readonly progressNode: HTMLElement;
  private readonly budgetBanner: HTMLElement;
  private readonly retryBanner: HTMLElement;
  private readonly retryMessage: HTMLElement;
  private readonly retryButton: HTMLButtonElement;
  private readonly metaNode: HTMLElement;
  private readonly leftCard: HTMLButtonElement;
  private readonly rightCard: HTMLButtonElement;

  constructor(root: HTMLElement, client: ApiClient, sessionId: string, events: JudgingEvents = {}) {
    this.client = client;
    this.sessionId = sessionId;
    this.events = events;

    this.progressNode = el('div', 'progress');
    this.budgetBanner = el('div', 'banner banner-budget', 'Budget reached. Further judgements still refine the ranking.');
    this.budgetBanner.hidden = true;
    this.retryMessage = el('span', 'retry-message');
    this.retryButton = el('button', 'retry-button', 'Retry');
    this.retryButton.type = 'button';
    this.retryButton.addEventListener('click', () => {
      void this.retry();
    });
    this.retryBanner = el('div', 'banner banner-retry');
    this.retryBanner.hidden = true;
    this.retryBanner.append(this.retryMessage, this.retryButton);
    this.metaNode = el('div', 'pair-meta');
    this.leftCard = this.buildCard('left');
    this.rightCard = this.buildCard('right');

    const cards = el('div', 'pair-cards');
    cards.append(this.leftCard, this.rightCard);
    root.append(this.progressNode, this.budgetBanner, this.retryBanner, this.metaNode, cards);
  }

  /** Loads session metadata and serves the first pair. */
  async start(): Promise<void> {
    const session = await this.client.getSession(this.sessionId);
    this.applySession(session);
    await this.loadPair();
  }

  /** Records the clicked side as the winner of the served pair. */
  async choose(side: 'left' | 'right'): Promise<void> {
    if (this.busy || this.pair === null) {
      return;
    }
    const pair = this.pair;
    const winner = side === 'left' ? pair.left.id : pair.right.id;
    this.pair = null;
    this.busy = true;
    this.setCardsEnabled(false);
    try {
      await this.submit(pair, winner);
    } finally {
      this.busy = false;
    }
  }

  /** Re-runs the action that failed, at most once per banner click. */
  async retry(): Promise<void> {
    if (this.busy || this.retryAction === null) {
      return;
    }
    const action = this.retryAction;
    this.clearRetry();
    this.busy = true;
    try {
      await action();
    } finally {
      this.busy = false;
    }
  }

  private async submit(pair: PendingPair, winner: number): Promise<void> {
    try {
      const ack = await this.client.submitJudgement(this.sessionId, pair.left.id, pair.right.id, winner);
      this.clearRetry();
      this.judgements = ack.step;
      this.renderProgress();
      this.setBudgetReached(ack.budget_exceeded);
      this.events.onJudged?.(ack);
    } catch (error) {
      if (error instanceof ApiError && error.isConflict) {
        // The service already moved on from this pair; adopt its pending
        // pair without recording anything and without bothering the user.
        await this.loadPair();
        return;
      }
      // The request may or may not have reached the service, so never
      // resubmit automatically. A manual retry is safe: if the judgement
      // was in fact recorded, the resubmission hits the conflict path
      // above and refreshes instead of double-counting.
      this.showRetry('Connection lost. The judgement was not recorded.', () => this.submit(pair, winner));
      return;
    }
    await this.loadPair();
  }

  private async loadPair(): Promise<void> {
    try {
      const pair = await this.client.nextPair(this.sessionId);
      this.pair = pair;
      this.renderPair(pair);
      this.setBudgetReached(pair.budget_exceeded);
      this.setCardsEnabled(true);
    } catch {
      this.showRetry('Could not load the next pair.', () => this.loadPair());
    }
  }

  private applySession(session: SessionInfo): void {
    this.judgements = session.judgements;
    this.budget = session.budget;
    this.renderProgress();
    this.setBudgetReached(session.budget_exceeded);
  }

  private renderPair(pair: PendingPair): void {
    this.metaNode.textContent =
      `Pair entropy ${pair.entropy.toFixed(4)}, ` +
      `P(${pair.left.label} wins) = ${pair.prob_left.toFixed(3)}`;
    this.renderCard(this.leftCard, pair.left.label, pair.left);
    this.renderCard(this.rightCard, pair.right.label, pair.right);
  }

  private renderCard(card: HTMLButtonElement, label: string, item: PendingPair['left']): void {
    card.replaceChildren(el('h3', 'card-label', label), contentMedia(item));
  }

  private renderProgress(): void {
    this.progressNode.textContent = `${this.judgements} / ${this.budget}`;
  }

  private setBudgetReached(reached: boolean): void {
    this.budgetBanner.hidden = !reached;
  }

  private setCardsEnabled(enabled: boolean): void {
    this.leftCard.disabled = !enabled;
    this.rightCard.disabled = !enabled;
  }

  private showRetry(message: string, action: () => Promise<void>): void {
    this.retryMessage.textContent = message;
    this.retryAction = action;
    this.retryBanner.hidden = false;
  }

  private clearRetry(): void {
    this.retryAction = null;
    this.retryBanner.hidden = true;
  }

  private buildCard(side: 'left' | 'right'): HTMLButtonElement {
    const card = el('button', `pair-card pair-card-${side}`);
    card.type = 'button';
    card.disabled = true;
    card.addEventListener('click', () => {
      void this.choose(side);
    });
    return card;
  }
}
