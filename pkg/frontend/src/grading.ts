/**
 * Grade review: edit a grading scheme, post it, and inspect per-item grade
 * probabilities with the assigned badge.
 *
 * Counts use integer steppers and must sum to the item count before a
 * request is sent; invalid schemes show inline validation instead. Moving
 * the threshold slider re-posts the scheme and re-renders in place.
 */

import { ApiClient } from './api.js';
import { el } from './dom.js';
import type { GradeReport, GradeScheme } from './types.js';

/** Default grade ladder used when the caller supplies no scheme. */
const DEFAULT_LABELS = ['A', 'B', 'C', 'D'];

/** Spreads the item count across the default ladder, best grades first. */
export function defaultScheme(nItems: number): GradeScheme {
  const counts = DEFAULT_LABELS.map((_, index) => {
    const base = Math.floor(nItems / DEFAULT_LABELS.length);
    const extra = index < nItems % DEFAULT_LABELS.length ? 1 : 0;
    return base + extra;
  });
  return { labels: [...DEFAULT_LABELS], counts, threshold: 0.9 };
}

/** Interactive grading panel bound to one session. */
export class GradePanel {
  private readonly client: ApiClient;
  private readonly sessionId: string;
  private readonly nItems: number;

  private readonly countInputs: HTMLInputElement[] = [];
  private readonly labelInputs: HTMLInputElement[] = [];
  private readonly slider: HTMLInputElement;
  private readonly sliderValue: HTMLElement;
  private readonly applyButton: HTMLButtonElement;
  private readonly validationNode: HTMLElement;
  private readonly resultsNode: HTMLElement;

  /** Monotonic request counter so only the latest response renders. */
  private requestSeq = 0;

  constructor(root: HTMLElement, client: ApiClient, sessionId: string, nItems: number, scheme?: GradeScheme) {
    this.client = client;
    this.sessionId = sessionId;
    this.nItems = nItems;
    const initial = scheme ?? defaultScheme(nItems);

    const form = el('div', 'grade-form');
    initial.labels.forEach((label, index) => {
      const row = el('div', 'grade-row');
      const labelInput = el('input', 'label-input');
      labelInput.type = 'text';
      labelInput.value = label;
      const countInput = el('input', 'count-input');
      countInput.type = 'number';
      countInput.min = '0';
      countInput.step = '1';
      countInput.value = String(initial.counts[index] ?? 0);
      countInput.addEventListener('input', () => this.validate());
      row.append(labelInput, countInput);
      form.append(row);
      this.labelInputs.push(labelInput);
      this.countInputs.push(countInput);
    });

    this.slider = el('input', 'threshold-slider');
    this.slider.type = 'range';
    this.slider.min = '0.01';
    this.slider.max = '1';
    this.slider.step = '0.01';
    this.slider.value = String(initial.threshold);
    this.sliderValue = el('span', 'threshold-value', this.slider.value);
    this.slider.addEventListener('input', () => {
      this.sliderValue.textContent = this.slider.value;
      if (this.validate()) {
        void this.apply();
      }
    });

    this.applyButton = el('button', 'grade-apply', 'Grade');
    this.applyButton.type = 'button';
    this.applyButton.addEventListener('click', () => {
      if (this.validate()) {
        void this.apply();
      }
    });
    this.validationNode = el('div', 'grade-validation');
    this.validationNode.hidden = true;
    this.resultsNode = el('div', 'grade-results');

    const sliderRow = el('div', 'threshold-row');
    sliderRow.append(el('span', 'threshold-label', 'Threshold'), this.slider, this.sliderValue);
    root.append(form, sliderRow, this.applyButton, this.validationNode, this.resultsNode);
    this.validate();
  }

  /** Posts the current scheme and renders the returned grades. */
  async apply(): Promise<void> {
    if (!this.validate()) {
      return;
    }
    const seq = ++this.requestSeq;
    let report: GradeReport;
    try {
      report = await this.client.grades(this.sessionId, this.readScheme());
    } catch {
      this.showValidation('Grading request failed. Adjust and try again.');
      return;
    }
    if (seq === this.requestSeq) {
      this.renderResults(report);
    }
  }

  /** Checks the scheme and toggles the inline validation message. */
  validate(): boolean {
    const counts = this.countInputs.map((input) => Number(input.value));
    const total = counts.reduce((sum, count) => sum + count, 0);
    if (counts.some((count) => !Number.isInteger(count) || count < 0)) {
      this.showValidation('Counts must be whole numbers.');
      return false;
    }
    if (total !== this.nItems) {
      this.showValidation(`Counts sum to ${total}, but the session has ${this.nItems} items.`);
      return false;
    }
    this.validationNode.hidden = true;
    this.applyButton.disabled = false;
    return true;
  }

  private readScheme(): GradeScheme {
    return {
      labels: this.labelInputs.map((input) => input.value),
      counts: this.countInputs.map((input) => Number(input.value)),
      threshold: Number(this.slider.value),
    };
  }

  private renderResults(report: GradeReport): void {
    const rows = report.grades.map((grade) => {
      const row = el('div', 'grade-result-row');
      row.dataset.item = String(grade.item);
      const badge = el('span', 'badge', grade.assigned);
      badge.dataset.item = String(grade.item);
      const header = el('div', 'grade-result-header');
      header.append(el('span', 'grade-item-label', grade.label), badge);

      const bars = el('div', 'grade-bars');
      const stacked = el('div', 'cumulative-bar');
      report.labels.forEach((label) => {
        const prob = grade.probs[label] ?? 0;
        const bar = el('div', 'grade-bar');
        bar.dataset.grade = label;
        bar.dataset.prob = String(prob);
        bar.style.height = `${Math.round(prob * 100)}%`;
        bar.title = `${label}: ${prob.toFixed(4)}`;
        bars.append(bar);
        // Stacking the same probabilities in grade order makes each
        // segment boundary the cumulative mass without computing it.
        const segment = el('div', label === grade.assigned ? 'cum-segment cum-assigned' : 'cum-segment');
        segment.dataset.grade = label;
        segment.style.width = `${prob * 100}%`;
        stacked.append(segment);
      });
      const marker = el('div', 'threshold-marker');
      marker.style.left = `${report.threshold * 100}%`;
      stacked.append(marker);
      row.append(header, bars, stacked);
      return row;
    });
    this.resultsNode.replaceChildren(...rows);
  }

  private showValidation(message: string): void {
    this.validationNode.textContent = message;
    this.validationNode.hidden = false;
    this.applyButton.disabled = true;
  }
}
