/**
 * Application shell: wires the judging, insight, and grading panels to one
 * session and keeps the insight views fresh while judging is under way.
 */

import { ApiClient } from './api.js';
import { el } from './dom.js';
import { GradePanel } from './grading.js';
import { InsightsPanel } from './insights.js';
import { JudgingPanel } from './judging.js';
import type { NewItem } from './api.js';

/** Refresh cadence for the insight views while a session is open. */
const POLL_INTERVAL_MS = 2000;

/** Top-level controller mounted on the page's root element. */
export class App {
  private readonly root: HTMLElement;
  private readonly client: ApiClient;
  private pollHandle: ReturnType<typeof setInterval> | null = null;

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
  }

  /** Opens the session named in the query string, or a creation form. */
  async init(): Promise<void> {
    const params = new URLSearchParams(window.location.search);
    const sessionId = params.get('session');
    if (sessionId !== null) {
      await this.openSession(sessionId);
    } else {
      this.renderCreateForm();
    }
  }

  /** Builds the three panels for an existing session and starts polling. */
  async openSession(sessionId: string): Promise<void> {
    const session = await this.client.getSession(sessionId);
    this.root.replaceChildren();

    const judgingRoot = el('section', 'judging');
    const insightsRoot = el('section', 'insights');
    const gradingRoot = el('section', 'grading');
    this.root.append(judgingRoot, insightsRoot, gradingRoot);

    const insights = new InsightsPanel(insightsRoot, this.client, sessionId);
    const judging = new JudgingPanel(judgingRoot, this.client, sessionId, {
      onJudged: () => {
        void insights.refresh();
      },
    });
    new GradePanel(gradingRoot, this.client, sessionId, session.items.length);

    await judging.start();
    await insights.refresh();
    this.startPolling(insights);
  }

  /** Stops the report polling loop. */
  stopPolling(): void {
    if (this.pollHandle !== null) {
      clearInterval(this.pollHandle);
      this.pollHandle = null;
    }
  }

  private startPolling(insights: InsightsPanel): void {
    this.stopPolling();
    this.pollHandle = setInterval(() => {
      void insights.refresh();
    }, POLL_INTERVAL_MS);
  }

  private renderCreateForm(): void {
    this.root.replaceChildren();
    const form = el('div', 'create-form');
    form.append(el('h2', 'create-title', 'New session'));
    const labelsInput = el('textarea', 'create-labels');
    labelsInput.placeholder = 'One item label per line';
    labelsInput.rows = 6;
    const kInput = el('input', 'create-k');
    kInput.type = 'number';
    kInput.min = '1';
    kInput.step = '1';
    kInput.value = '10';
    const selectorInput = el('select', 'create-selector');
    for (const kind of ['entropy', 'nrp', 'random']) {
      const option = el('option', undefined, kind);
      option.value = kind;
      selectorInput.append(option);
    }
    const submit = el('button', 'create-submit', 'Create session');
    submit.type = 'button';
    const error = el('div', 'create-error');
    error.hidden = true;
    submit.addEventListener('click', () => {
      void this.createSession(labelsInput, selectorInput, kInput, error);
    });
    form.append(labelsInput, selectorInput, kInput, submit, error);
    this.root.append(form);
  }

  private async createSession(
    labelsInput: HTMLTextAreaElement,
    selectorInput: HTMLSelectElement,
    kInput: HTMLInputElement,
    error: HTMLElement,
  ): Promise<void> {
    const labels = labelsInput.value
      .split('\n')
      .map((line) => line.trim())
      .filter((line) => line.length > 0);
    if (labels.length < 2) {
      error.textContent = 'Enter at least two item labels.';
      error.hidden = false;
      return;
    }
    const items: NewItem[] = labels.map((label, index) => ({ id: index + 1, label }));
    try {
      const session = await this.client.createSession(items, selectorInput.value, Number(kInput.value));
      await this.openSession(session.id);
    } catch {
      error.textContent = 'Could not create the session.';
      error.hidden = false;
    }
  }
}

function bootstrap(): void {
  const root = document.getElementById('app');
  if (root === null) {
    return;
  }
  const params = new URLSearchParams(window.location.search);
  const client = new ApiClient({ token: params.get('token') ?? undefined });
  void new App(root, client).init();
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  bootstrap();
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', bootstrap);
}
