/**
 * Live insight views fed entirely by the session report endpoint: rank
 * distributions, the pairwise entropy grid, the served pair's posterior
 * density, and the max-entropy trajectory.
 *
 * The panel renders service numbers verbatim. Layout scaling and colour
 * mapping are the only local arithmetic; no statistic shown here is
 * computed client-side.
 */

import { ApiClient } from './api.js';
import { el } from './dom.js';
import type { DensityCurve, SessionReport } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const CHART_WIDTH = 280;
const CHART_HEIGHT = 90;

/** Report-driven dashboard for one session. */
export class InsightsPanel {
  private readonly client: ApiClient;
  private readonly sessionId: string;

  private readonly staleNode: HTMLElement;
  private readonly distributionsNode: HTMLElement;
  private readonly gridNode: HTMLElement;
  private readonly densityNode: HTMLElement;
  private readonly seriesNode: HTMLElement;

  constructor(root: HTMLElement, client: ApiClient, sessionId: string) {
    this.client = client;
    this.sessionId = sessionId;

    this.staleNode = el('div', 'stale-indicator', 'Showing stale data. The last refresh failed.');
    this.staleNode.hidden = true;
    this.distributionsNode = this.section(root, 'distributions', 'Rank distributions');
    this.gridNode = this.section(root, 'entropy-grid', 'Pair uncertainty');
    this.densityNode = this.section(root, 'density', 'Served pair posterior');
    this.seriesNode = this.section(root, 'entropy-series', 'Max entropy per judgement');
    root.prepend(this.staleNode);
  }

  /** Fetches a fresh report; a failed fetch flags the views as stale. */
  async refresh(): Promise<void> {
    let report: SessionReport;
    try {
      report = await this.client.report(this.sessionId);
    } catch {
      this.staleNode.hidden = false;
      return;
    }
    this.render(report);
  }

  /** Rebuilds every view from the given report. */
  render(report: SessionReport): void {
    this.staleNode.hidden = true;
    const labels = new Map(report.session.items.map((item) => [item.id, item.label]));
    this.renderDistributions(report, labels);
    this.renderGrid(report, labels);
    this.renderDensity(report, labels);
    this.renderSeries(report);
  }

  private renderDistributions(report: SessionReport, labels: Map<number, string>): void {
    const n = report.session.items.length;
    const rows = report.distributions.map((dist) => {
      const row = el('div', 'dist-row');
      row.dataset.item = String(dist.item);
      const header = el(
        'span',
        'dist-label',
        `${labels.get(dist.item) ?? dist.item}, expected rank ${dist.expected_rank.toFixed(2)}`,
      );
      const bars = el('div', 'dist-bars');
      dist.probs.forEach((prob, index) => {
        const bar = el('div', 'dist-bar');
        bar.dataset.rank = String(index + 1);
        bar.dataset.prob = String(prob);
        bar.style.height = `${Math.round(prob * 100)}%`;
        bar.title = `rank ${index + 1}: ${prob.toFixed(4)}`;
        bars.append(bar);
      });
      const marker = el('div', 'rank-marker');
      marker.dataset.expectedRank = String(dist.expected_rank);
      marker.style.left = n > 1 ? `${((dist.expected_rank - 1) / (n - 1)) * 100}%` : '0%';
      bars.append(marker);
      row.append(header, bars);
      return row;
    });
    this.fill(this.distributionsNode, rows);
  }

  private renderGrid(report: SessionReport, labels: Map<number, string>): void {
    const grid = report.entropy.grid;
    const finite = grid.flat().filter((value): value is number => value !== null);
    const lowest = finite.length > 0 ? Math.min(...finite) : 0;
    const table = el('table', 'grid-table');
    const items = report.session.items;
    grid.forEach((gridRow, i) => {
      const row = el('tr');
      gridRow.forEach((value, j) => {
        const cell = el('td', value === null ? 'grid-cell grid-diag' : 'grid-cell');
        if (value !== null) {
          cell.dataset.entropy = String(value);
          cell.title = `${labels.get(items[i]?.id ?? 0) ?? i} vs ${labels.get(items[j]?.id ?? 0) ?? j}: ${value.toFixed(4)}`;
          // Entropy tops out at zero; map values so less certain pairs
          // render lighter.
          const t = lowest < 0 ? (value - lowest) / (0 - lowest) : 1;
          cell.style.backgroundColor = `hsl(215, 60%, ${Math.round(30 + 65 * t)}%)`;
        }
        row.append(cell);
      });
      table.append(row);
    });
    this.fill(this.gridNode, [table]);
  }

  private renderDensity(report: SessionReport, labels: Map<number, string>): void {
    if (report.pending === null) {
      this.fill(this.densityNode, [el('p', 'density-empty', 'No pair is currently served.')]);
      return;
    }
    const pending = report.pending;
    const caption = el(
      'p',
      'density-caption',
      `${labels.get(pending.left) ?? pending.left} vs ${labels.get(pending.right) ?? pending.right}, ` +
        `entropy ${pending.entropy.toFixed(4)}, ` +
        `P(${labels.get(pending.left) ?? pending.left} wins) = ${pending.prob_left.toFixed(3)}`,
    );
    this.fill(this.densityNode, [caption, curveSvg(pending.density, 'density-curve')]);
  }

  private renderSeries(report: SessionReport): void {
    const series = report.entropy.series;
    if (series.length === 0) {
      this.fill(this.seriesNode, [el('p', 'series-empty', 'No judgements yet.')]);
      return;
    }
    const curve: DensityCurve = {
      x: series.map((_, index) => (series.length > 1 ? index / (series.length - 1) : 0)),
      pdf: series,
    };
    this.fill(this.seriesNode, [curveSvg(curve, 'series-curve')]);
  }

  private section(root: HTMLElement, className: string, title: string): HTMLElement {
    const section = el('section', className);
    section.append(el('h3', 'section-title', title));
    const body = el('div', `${className}-body`);
    section.append(body);
    root.append(section);
    return body;
  }

  private fill(node: HTMLElement, children: (HTMLElement | SVGElement)[]): void {
    node.replaceChildren(...children);
  }
}

/**
 * Renders a sampled curve as an SVG polyline scaled to the chart box.
 *
 * The raw samples are mirrored into data attributes so every plotted value
 * stays inspectable as served.
 */
function curveSvg(curve: DensityCurve, className: string): SVGElement {
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('class', className);
  svg.setAttribute('viewBox', `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`);
  const polyline = document.createElementNS(SVG_NS, 'polyline');
  const xs = curve.x;
  const ys = curve.pdf;
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const points = xs
    .map((x, index) => {
      const px = ((x - xMin) / xSpan) * CHART_WIDTH;
      const py = CHART_HEIGHT - ((ys[index]! - yMin) / ySpan) * CHART_HEIGHT;
      return `${px.toFixed(2)},${py.toFixed(2)}`;
    })
    .join(' ');
  polyline.setAttribute('points', points);
  polyline.setAttribute('fill', 'none');
  svg.dataset.xValues = xs.join(',');
  svg.dataset.yValues = ys.join(',');
  svg.append(polyline);
  return svg;
}
