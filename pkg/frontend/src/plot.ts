/** File-to-file plotting: read schema-v1 JSON, write an SVG. */
import { readFileSync, writeFileSync } from "node:fs";

import { plotDynamics } from "./dynamics";
import { plotMargins } from "./margins";
import { SchemaError } from "./schema";

export interface PlotSpec {
  kind: "margins" | "dynamics";
  /** Path of the margins or dynamics JSON document. */
  input: string;
  /** Path the SVG is written to. */
  output: string;
  /** Path of an equilibrium JSON document to overlay (dynamics only). */
  equilibrium?: string;
  title?: string;
  budgetLine?: boolean;
}

function readJson(path: string): unknown {
  return JSON.parse(readFileSync(path, "utf-8"));
}

export function renderSpec(spec: PlotSpec): string {
  const doc = readJson(spec.input);
  const options = { title: spec.title, budgetLine: spec.budgetLine };
  let svg: string;
  if (spec.kind === "margins") {
    if (spec.equilibrium !== undefined) {
      throw new SchemaError("equilibrium overlays apply to dynamics charts only");
    }
    svg = plotMargins(doc, options);
  } else {
    const equilibrium =
      spec.equilibrium === undefined ? undefined : readJson(spec.equilibrium);
    svg = plotDynamics(doc, { ...options, equilibrium });
  }
  writeFileSync(spec.output, svg + "\n");
  return svg;
}
