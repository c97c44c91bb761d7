/** Structural inspection of generated SVG markup, plus fixture loading.
 * Tests assert element and class counts, never pixel output.
 */
import { readFileSync } from "node:fs";

export function loadFixture(name: string): unknown {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8"));
}

export interface SvgElement {
  tag: string;
  attrs: Record<string, string>;
  text: string;
}

const TAG = /<(\w+)((?:\s+[\w:-]+="[^"]*")*)\s*\/?>(?:([^<]*)<\/\1>)?/g;
const ATTR = /([\w:-]+)="([^"]*)"/g;

export function elements(svg: string): SvgElement[] {
  const out: SvgElement[] = [];
  for (const match of svg.matchAll(TAG)) {
    const attrs: Record<string, string> = {};
    for (const pair of match[2]!.matchAll(ATTR)) {
      attrs[pair[1]!] = pair[2]!;
    }
    out.push({ tag: match[1]!, attrs, text: match[3] ?? "" });
  }
  return out;
}

/** Elements whose class attribute contains `cls` as a whole token. */
export function byClass(svg: string, cls: string): SvgElement[] {
  return elements(svg).filter((e) =>
    (e.attrs["class"] ?? "").split(/\s+/).includes(cls),
  );
}
