/** Dynamics outcome charts.
 *
 * One bar per project with the final cost after the run, ordered by
 * approval score (descending; document order breaks ties). A black outline
 * marks the starting cost, a black triangle sits above projects that were
 * funded at the start, and when an equilibrium document is supplied a brown
 * circle marks each project's equilibrium cost.
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
import {
  DynamicsDoc,
  MoneyJson,
  SchemaError,
  moneyValue,
  readDynamicsDoc,
  readEquilibriumDoc,
} from "./schema";
import { el, svgRoot, trim } from "./svg";

export const DYNAMICS_COLORS = {
  funded: "#5b8bb5",
  unfunded: "#b0bec5",
  equilibrium: "#795548",
} as const;

export interface DynamicsBar {
  project: string;
  approvals: number;
  initial: number;
  final: number;
  initiallyFunded: boolean;
  finallyFunded: boolean;
  equilibrium: number | null;
}

export interface DynamicsChart {
  rule: string;
  budget: number;
  iterations: number;
  seed: number;
  bars: DynamicsBar[];
}

export interface DynamicsOptions extends ChartOptions {
  /** An equilibrium document whose profile is marked on each bar. */
  equilibrium?: unknown;
}

function lookup(table: Record<string, MoneyJson>, project: string, what: string): number {
  const entry = table[project];
  if (entry === undefined) {
    throw new SchemaError(`project ${project} has no ${what} cost`);
  }
  return moneyValue(entry);
}

export function buildDynamicsChart(doc: unknown, equilibrium?: unknown): DynamicsChart {
  const parsed: DynamicsDoc = readDynamicsDoc(doc);
  const overlay = equilibrium === undefined ? null : readEquilibriumDoc(equilibrium);
  const bars = parsed.projects.map((project) => {
    let equilibriumCost: number | null = null;
    if (overlay !== null) {
      equilibriumCost = lookup(overlay.profile, project, "equilibrium");
    }
    return {
      project,
      approvals: parsed.approvals[project] ?? 0,
      initial: lookup(parsed.initial, project, "initial"),
      final: lookup(parsed.final, project, "final"),
      initiallyFunded: parsed.initial_funded.includes(project),
      finallyFunded: parsed.final_funded.includes(project),
      equilibrium: equilibriumCost,
    };
  });
  const byApproval = bars
    .map((bar, index) => ({ bar, index }))
    .sort((a, b) => b.bar.approvals - a.bar.approvals || a.index - b.index)
    .map(({ bar }) => bar);
  return {
    rule: parsed.rule,
    budget: moneyValue(parsed.budget),
    iterations: parsed.config.iterations,
    seed: parsed.generator.seed,
    bars: byApproval,
  };
}

function triangle(cx: number, tipY: number, size: number): string {
  const half = size / 2;
  const points = [
    `${trim(cx)},${trim(tipY)}`,
    `${trim(cx - half)},${trim(tipY - size)}`,
    `${trim(cx + half)},${trim(tipY - size)}`,
  ].join(" ");
  return el("polygon", { class: "winner-marker", points, fill: "#000" });
}

export function renderDynamicsSvg(chart: DynamicsChart, options: ChartOptions = {}): string {
  const peak = Math.max(
    chart.budget,
    ...chart.bars.map((b) => Math.max(b.initial, b.final, b.equilibrium ?? 0)),
  );
  const frame = makeFrame(peak, options);
  const parts: string[] = [];
  const slotList = slots(frame, chart.bars.length);

  chart.bars.forEach((bar, i) => {
    const slot = slotList[i]!;
    const base = frame.y(0);
    const finalY = frame.y(bar.final);
    const initialY = frame.y(bar.initial);
    parts.push(
      el("rect", {
        class: `bar ${bar.finallyFunded ? "funded" : "unfunded"}`,
        x: slot.barX,
        y: finalY,
        width: slot.barWidth,
        height: base - finalY,
        fill: bar.finallyFunded ? DYNAMICS_COLORS.funded : DYNAMICS_COLORS.unfunded,
      }),
    );
    parts.push(
      el("rect", {
        class: "cost-outline",
        x: slot.barX,
        y: initialY,
        width: slot.barWidth,
        height: base - initialY,
        fill: "none",
        stroke: "#000",
        "stroke-width": 1.5,
      }),
    );
    if (bar.initiallyFunded) {
      parts.push(triangle(slot.center, Math.min(finalY, initialY) - 6, 10));
    }
    if (bar.equilibrium !== null) {
      parts.push(
        el("circle", {
          class: "equilibrium-marker",
          cx: slot.center,
          cy: frame.y(bar.equilibrium),
          r: 5,
          fill: DYNAMICS_COLORS.equilibrium,
        }),
      );
    }
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

export function plotDynamics(doc: unknown, options: DynamicsOptions = {}): string {
  const { equilibrium, ...chartOptions } = options;
  return renderDynamicsSvg(buildDynamicsChart(doc, equilibrium), chartOptions);
}
