// Small DOM/SVG helpers; no framework, no layout assumptions (jsdom-safe).

const SVG_NS = "http://www.w3.org/2000/svg";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text != null) node.textContent = text;
  return node;
}

export function svg(tag: string, attrs: Record<string, string> = {}): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** Verbatim display of a payload number; the audit depends on this. */
export function show(value: number | null | undefined): string {
  return value == null ? "–" : String(value);
}

export interface Scale {
  (value: number): number;
}

/** Affine map from a data extent onto pixel coordinates. */
export function linearScale(lo: number, hi: number, a: number, b: number): Scale {
  const span = hi - lo || 1;
  return (value: number) => a + ((value - lo) / span) * (b - a);
}

export function extentOf(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return [lo, hi];
}

/** Grayscale hex for t in [0, 1]; 0 is light, 1 is dark. */
export function grayscale(t: number): string {
  const level = Math.round(230 - Math.max(0, Math.min(1, t)) * 180);
  const hex = level.toString(16).padStart(2, "0");
  return `#${hex}${hex}${hex}`;
}
