export {
  SchemaError,
  moneyValue,
  readDynamicsDoc,
  readEquilibriumDoc,
  readMarginsDoc,
} from "./schema";
export type { DynamicsDoc, EquilibriumDoc, MarginsDoc, MoneyJson } from "./schema";
export { MARGIN_COLORS, buildMarginsChart, plotMargins, renderMarginsSvg } from "./margins";
export type { MarginBar, MarginsChart } from "./margins";
export {
  DYNAMICS_COLORS,
  buildDynamicsChart,
  plotDynamics,
  renderDynamicsSvg,
} from "./dynamics";
export type { DynamicsBar, DynamicsChart, DynamicsOptions } from "./dynamics";
export { renderSpec } from "./plot";
export type { PlotSpec } from "./plot";
export type { ChartOptions } from "./frame";
