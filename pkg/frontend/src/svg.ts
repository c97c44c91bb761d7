/** String-based SVG assembly. No DOM: charts are built as plain text so the
 * package runs anywhere Node does and tests can inspect the markup directly.
 */

export type Attrs = Record<string, string | number>;

function escapeText(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;");
}

function escapeAttr(value: string): string {
  return escapeText(value).replaceAll('"', "&quot;");
}

function renderAttrs(attrs: Attrs): string {
  return Object.entries(attrs)
    .map(([key, value]) => {
      const text = typeof value === "number" ? trim(value) : escapeAttr(value);
      return ` ${key}="${text}"`;
    })
    .join("");
}

/** Numbers are rounded to 3 decimals to keep the markup readable. */
export function trim(value: number): string {
  const rounded = Math.round(value * 1000) / 1000;
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

export function el(tag: string, attrs: Attrs, children: string[] = []): string {
  const open = `<${tag}${renderAttrs(attrs)}>`;
  if (children.length === 0) {
    return `<${tag}${renderAttrs(attrs)}/>`;
  }
  return `${open}${children.join("")}</${tag}>`;
}

export function textEl(attrs: Attrs, content: string): string {
  return `<text${renderAttrs(attrs)}>${escapeText(content)}</text>`;
}

export function svgRoot(width: number, height: number, children: string[]): string {
  return el(
    "svg",
    {
      xmlns: "http://www.w3.org/2000/svg",
      viewBox: `0 0 ${trim(width)} ${trim(height)}`,
      width,
      height,
    },
    children,
  );
}
