// Output comparison: contrastive projection scatter and the ordered
// inconsistency-cluster glyph list.

import { clear, el, extentOf, linearScale, show, svg } from "../dom.js";
import type { Analysis, ClusterSummary, DensityGrid, ViewState } from "../types.js";

const SIZE = 360;
const PAD = 16;
const GLYPH = 72;

export interface ComparisonHandlers {
  onSelectCluster(clusterId: number): void;
  onTopLayerToggle(): void;
}

function scatterScales(analysis: Analysis) {
  const points = analysis.projection?.points ?? [];
  const [x0, x1] = extentOf(points.map((p) => p[0]));
  const [y0, y1] = extentOf(points.map((p) => p[1]));
  return {
    x: linearScale(x0, x1, PAD, SIZE - PAD),
    y: linearScale(y0, y1, SIZE - PAD, PAD),
  };
}

export function renderComparisonScatter(root: HTMLElement, analysis: Analysis,
                                        state: ViewState,
                                        handlers: ComparisonHandlers): void {
  clear(root);
  if (!analysis.projection) {
    root.appendChild(el("p", { class: "empty-note" }, "no projection for this round"));
    return;
  }
  const toggle = el("button", { class: "top-layer-toggle" },
                    `top layer: ${state.topLayer}`);
  toggle.addEventListener("click", () => handlers.onTopLayerToggle());
  root.appendChild(toggle);

  const { x, y } = scatterScales(analysis);
  const chart = svg("svg", { class: "comparison-scatter", viewBox: `0 0 ${SIZE} ${SIZE}`,
                             width: String(SIZE), height: String(SIZE) });
  const inconsistent = new Set(analysis.inconsistency.ids);
  const groups: Array<[string, (i: number) => boolean]> =
    state.topLayer === "inconsistent"
      ? [["consistent", (i) => !inconsistent.has(i)], ["inconsistent", (i) => inconsistent.has(i)]]
      : [["inconsistent", (i) => inconsistent.has(i)], ["consistent", (i) => !inconsistent.has(i)]];
  for (const [name, member] of groups) {
    analysis.projection.points.forEach((point, i) => {
      if (!member(i)) return;
      chart.appendChild(svg("circle", {
        class: `record-dot ${name}`,
        "data-record": String(i),
        cx: String(x(point[0])), cy: String(y(point[1])), r: "2.5",
        fill: name === "inconsistent" ? "#8b4513" : "#b8b8b8",
      }));
    });
  }
  root.appendChild(chart);
}

function densityCells(density: DensityGrid, size: number): SVGElement {
  const group = svg("g", { class: "density" });
  const counts = density.counts;
  let peak = 0;
  for (const row of counts) for (const v of row) peak = Math.max(peak, v);
  const cell = size / density.grid;
  counts.forEach((row, gx) => {
    row.forEach((value, gy) => {
      if (value === 0) return;
      const level = 1 - (peak ? value / peak : 0) * 0.85;
      const channel = Math.round(level * 255).toString(16).padStart(2, "0");
      group.appendChild(svg("rect", {
        x: String(gx * cell), y: String(size - (gy + 1) * cell),
        width: String(cell), height: String(cell),
        fill: `#${channel}${channel}ff`,
      }));
    });
  });
  return group;
}

export function renderGlyphList(root: HTMLElement, analysis: Analysis, state: ViewState,
                                overlaps: Map<number, number>,
                                handlers: ComparisonHandlers): void {
  clear(root);
  if (!analysis.density) return;
  const extent = analysis.density.extent;
  const x = linearScale(extent[0], extent[1], 0, GLYPH);
  const y = linearScale(extent[2], extent[3], GLYPH, 0);

  const list = el("div", { class: "glyph-list" });
  for (const cluster of analysis.clusters) {
    list.appendChild(renderGlyph(cluster, analysis.density, x, y,
                                 cluster.id === state.selectedCluster,
                                 overlaps.get(cluster.id), handlers));
  }
  root.appendChild(list);
}

function renderGlyph(cluster: ClusterSummary, density: DensityGrid,
                     x: (v: number) => number, y: (v: number) => number,
                     selected: boolean, overlap: number | undefined,
                     handlers: ComparisonHandlers): HTMLElement {
  const box = el("figure", {
    class: `cluster-glyph${selected ? " selected" : ""}`,
    "data-cluster": String(cluster.id),
  });
  const chart = svg("svg", { viewBox: `0 0 ${GLYPH} ${GLYPH}`,
                             width: String(GLYPH), height: String(GLYPH) });
  chart.appendChild(densityCells(density, GLYPH));
  if (cluster.hull.length) {
    const points = cluster.hull.map((p) => `${x(p[0])},${y(p[1])}`).join(" ");
    chart.appendChild(svg(cluster.hull.length > 2 ? "polygon" : "polyline", {
      class: "cluster-hull", points, fill: "rgba(139,69,19,0.25)", stroke: "#8b4513",
    }));
  }
  box.appendChild(chart);
  const caption = el("figcaption", { class: "glyph-caption" });
  caption.appendChild(el("span", { class: "glyph-size" }, `size ${show(cluster.size)}`));
  caption.appendChild(el("span", { class: "glyph-accuracy" },
                         `acc ${show(cluster.accuracy)}`));
  if (overlap != null && overlap > 0) {
    caption.appendChild(el("span", { class: "glyph-overlap" },
                           `overlap ${show(overlap)}`));
  }
  box.appendChild(caption);
  box.addEventListener("click", () => handlers.onSelectCluster(cluster.id));
  return box;
}
