/** Validation of the schema-v1 JSON artifacts this package consumes.
 *
 * Money values arrive as exact rationals alongside a 12-digit decimal
 * rendering; charts only need the decimal. Every reader rejects documents
 * whose schema tag, kind, or shape is off, so rendering code can assume a
 * well-formed document.
 */
import { z } from "zod";

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

const money = z.object({
  decimal: z.string(),
  num: z.string(),
  den: z.string(),
});

export type MoneyJson = z.infer<typeof money>;

/** The decimal rendering as a plot coordinate. */
export function moneyValue(m: MoneyJson): number {
  const value = Number(m.decimal);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`unreadable money value ${JSON.stringify(m)}`);
  }
  return value;
}

const marginEntry = z.object({
  project: z.string(),
  approvals: z.number().int().nonnegative(),
  cost: money,
  status: z.enum(["winning", "losing"]),
  margin: money,
  best_response_low: money,
  best_response_high: money,
  monotone_certified: z.boolean(),
  never_funded: z.boolean(),
});

const marginsDoc = z.object({
  schema: z.literal("v1"),
  kind: z.literal("margins"),
  rule: z.string(),
  budget: money,
  tolerance: money,
  projects: z.array(marginEntry).nonempty(),
});

export type MarginsDoc = z.infer<typeof marginsDoc>;
export type MarginEntry = z.infer<typeof marginEntry>;

const snapshot = z.object({
  iteration: z.number().int().nonnegative(),
  costs: z.record(z.string(), money),
  funded: z.array(z.string()),
});

const dynamicsDoc = z.object({
  schema: z.literal("v1"),
  kind: z.literal("dynamics"),
  rule: z.string(),
  generator: z.object({ name: z.string(), seed: z.number().int() }),
  config: z.object({
    iterations: z.number().int().nonnegative(),
    step_fraction: money,
    record_every: z.number().int().positive(),
  }),
  budget: money,
  projects: z.array(z.string()).nonempty(),
  approvals: z.record(z.string(), z.number().int().nonnegative()),
  initial: z.record(z.string(), money),
  initial_funded: z.array(z.string()),
  snapshots: z.array(snapshot),
  final: z.record(z.string(), money),
  final_funded: z.array(z.string()),
});

export type DynamicsDoc = z.infer<typeof dynamicsDoc>;

const equilibriumDoc = z.object({
  schema: z.literal("v1"),
  kind: z.literal("equilibrium"),
  rule: z.string(),
  guarantee: z.string(),
  order: z.array(z.string()),
  budget: money,
  projects: z.array(z.string()).nonempty(),
  profile: z.record(z.string(), money),
  predicted_funded: z.array(z.string()),
});

export type EquilibriumDoc = z.infer<typeof equilibriumDoc>;

function parse<T>(schema: z.ZodType<T>, doc: unknown, what: string): T {
  const result = schema.safeParse(doc);
  if (!result.success) {
    const first = result.error.issues[0];
    const where = first && first.path.length ? ` at ${first.path.join(".")}` : "";
    const why = first ? first.message : "invalid document";
    throw new SchemaError(`not a v1 ${what} document${where}: ${why}`);
  }
  return result.data;
}

export function readMarginsDoc(doc: unknown): MarginsDoc {
  return parse(marginsDoc, doc, "margins");
}

export function readDynamicsDoc(doc: unknown): DynamicsDoc {
  return parse(dynamicsDoc, doc, "dynamics");
}

export function readEquilibriumDoc(doc: unknown): EquilibriumDoc {
  return parse(equilibriumDoc, doc, "equilibrium");
}
