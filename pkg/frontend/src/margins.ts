/** Margin bar charts.
 *
 * One bar per project, ordered by approval score (descending; document
 * order breaks ties). A winning project shows its reported cost in green
 * with a brighter extension up to cost plus margin, a losing project shows
 * its cost in red. A black outline marks the reported cost on every bar, a
 * whisker spans the best-response interval, and a dashed line marks the
 * budget.
 */
import {
  ChartOptions,
  axis,
  budgetLine,
  makeFrame,
  projectLabel,
  slots,
  title,
} from "./frame";
import { MarginsDoc, moneyValue, readMarginsDoc } from "./schema";
import { el, svgRoot } from "./svg";

export const MARGIN_COLORS = {
  winning: "#2e7d32",
  winningExtension: "#81c784",
  losing: "#c62828",
} as const;

export interface MarginBar {
  project: string;
  approvals: number;
  status: "winning" | "losing";
  cost: number;
  margin: number;
  bestResponseLow: number;
  bestResponseHigh: number;
  neverFunded: boolean;
}

export interface MarginsChart {
  rule: string;
  budget: number;
  bars: MarginBar[];
}

export function buildMarginsChart(doc: unknown): MarginsChart {
  const parsed: MarginsDoc = readMarginsDoc(doc);
  const bars = parsed.projects.map((entry) => ({
    project: entry.project,
    approvals: entry.approvals,
    status: entry.status,
    cost: moneyValue(entry.cost),
    margin: moneyValue(entry.margin),
    bestResponseLow: moneyValue(entry.best_response_low),
    bestResponseHigh: moneyValue(entry.best_response_high),
    neverFunded: entry.never_funded,
  }));
  const byApproval = bars
    .map((bar, index) => ({ bar, index }))
    .sort((a, b) => b.bar.approvals - a.bar.approvals || a.index - b.index)
    .map(({ bar }) => bar);
  return { rule: parsed.rule, budget: moneyValue(parsed.budget), bars: byApproval };
}

export function renderMarginsSvg(chart: MarginsChart, options: ChartOptions = {}): string {
  const peak = Math.max(
    chart.budget,
    ...chart.bars.map((b) => Math.max(b.cost + Math.max(b.margin, 0), b.bestResponseHigh)),
  );
  const frame = makeFrame(peak, options);
  const parts: string[] = [];
  const slotList = slots(frame, chart.bars.length);

  chart.bars.forEach((bar, i) => {
    const slot = slotList[i]!;
    const base = frame.y(0);
    const costY = frame.y(bar.cost);
    parts.push(
      el("rect", {
        class: `bar ${bar.status}`,
        x: slot.barX,
        y: costY,
        width: slot.barWidth,
        height: base - costY,
        fill: MARGIN_COLORS[bar.status],
      }),
    );
    if (bar.status === "winning" && bar.margin > 0) {
      const topY = frame.y(bar.cost + bar.margin);
      parts.push(
        el("rect", {
          class: "margin-extension",
          x: slot.barX,
          y: topY,
          width: slot.barWidth,
          height: costY - topY,
          fill: MARGIN_COLORS.winningExtension,
        }),
      );
    }
    parts.push(
      el("rect", {
        class: "cost-outline",
        x: slot.barX,
        y: costY,
        width: slot.barWidth,
        height: base - costY,
        fill: "none",
        stroke: "#000",
        "stroke-width": 1.5,
      }),
    );
    parts.push(
      el("line", {
        class: `best-response ${bar.status}`,
        x1: slot.center,
        y1: frame.y(bar.bestResponseLow),
        x2: slot.center,
        y2: frame.y(bar.bestResponseHigh),
        stroke: MARGIN_COLORS[bar.status],
        "stroke-width": 2.5,
      }),
    );
    parts.push(projectLabel(slot, frame, bar.project));
  });

  parts.push(axis(frame));
  if (options.budgetLine !== false) {
    parts.push(budgetLine(frame, chart.budget));
  }
  if (options.title) {
    parts.push(title(frame, options.title));
  }
  return svgRoot(frame.width, frame.height, parts);
}

export function plotMargins(doc: unknown, options: ChartOptions = {}): string {
  return renderMarginsSvg(buildMarginsChart(doc), options);
}
