/** Shared chart geometry: one vertical value scale, evenly spaced bar slots,
 * and the common chrome (axis baseline, project labels, budget line, title).
 */
import { el, textEl, trim } from "./svg";

export interface ChartOptions {
  width?: number;
  height?: number;
  title?: string;
  /** Draw the horizontal budget reference line. Defaults to true. */
  budgetLine?: boolean;
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  top: number;
  plotWidth: number;
  plotHeight: number;
  /** Maps a money value to a y pixel (SVG y axis grows downward). */
  y: (value: number) => number;
}

export interface Slot {
  center: number;
  barX: number;
  barWidth: number;
}

const MARGIN = { top: 44, right: 72, bottom: 40, left: 52 };

export function makeFrame(maxValue: number, options: ChartOptions): Frame {
  const width = options.width ?? 640;
  const height = options.height ?? 360;
  const plotWidth = width - MARGIN.left - MARGIN.right;
  const plotHeight = height - MARGIN.top - MARGIN.bottom;
  const top = maxValue <= 0 ? 1 : maxValue * 1.05;
  return {
    width,
    height,
    left: MARGIN.left,
    top: MARGIN.top,
    plotWidth,
    plotHeight,
    y: (value) => MARGIN.top + plotHeight - (value / top) * plotHeight,
  };
}

export function slots(frame: Frame, count: number): Slot[] {
  const step = frame.plotWidth / count;
  const barWidth = step * 0.6;
  return Array.from({ length: count }, (_, i) => {
    const center = frame.left + step * (i + 0.5);
    return { center, barX: center - barWidth / 2, barWidth };
  });
}

export function axis(frame: Frame): string {
  const y = frame.y(0);
  return el("line", {
    class: "axis",
    x1: frame.left,
    y1: y,
    x2: frame.left + frame.plotWidth,
    y2: y,
    stroke: "#000",
  });
}

export function projectLabel(slot: Slot, frame: Frame, name: string): string {
  return textEl(
    {
      class: "label",
      x: slot.center,
      y: frame.y(0) + 16,
      "text-anchor": "middle",
      "font-size": 11,
    },
    name,
  );
}

export function budgetLine(frame: Frame, budget: number): string {
  const y = frame.y(budget);
  const line = el("line", {
    class: "budget-line",
    x1: frame.left,
    y1: y,
    x2: frame.left + frame.plotWidth,
    y2: y,
    stroke: "#555",
    "stroke-dasharray": "6 3",
  });
  const label = textEl(
    {
      class: "budget-label",
      x: frame.left + frame.plotWidth + 6,
      y: y + 4,
      "font-size": 11,
    },
    `budget ${trim(budget)}`,
  );
  return line + label;
}

export function title(frame: Frame, text: string): string {
  return textEl(
    {
      class: "title",
      x: frame.left + frame.plotWidth / 2,
      y: frame.top - 24,
      "text-anchor": "middle",
      "font-size": 14,
      "font-weight": "bold",
    },
    text,
  );
}
