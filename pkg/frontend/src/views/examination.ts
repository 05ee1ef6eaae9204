// Heterogeneity examination: paired pixel maps with hover-linking, the
// three-population dimension distribution, the label exploration matrix,
// the instance panel, and annotation provenance.

import { clear, el, linearScale, show, svg } from "../dom.js";
import type {
  Annotation, Analysis, Dimensions, Distribution, GradCam, LabelMatrix,
  RecordDetail, ViewState,
} from "../types.js";

const CELL = 14;

export interface ExaminationHandlers {
  onDimensionClick(dim: number): void;
  onScaleToggle(): void;
  onRecordClick(recordId: number): void;
  onGridChange(grid: number): void;
  onHideScattersToggle(): void;
  onZoomChange(zoom: number): void;
  onAnnotateCluster(note: string): void;
  onAnnotationDelete(id: number): void;
  onEntranceSwitch(entrance: ViewState["entrance"]): void;
}

// --- paired pixel maps ----------------------------------------------------

function pixelGrid(map: number[][], side: "left" | "right", dims: [number, number],
                   handlers: ExaminationHandlers): SVGElement {
  const [h, w] = dims;
  const chart = svg("svg", {
    class: `pixel-map pixel-map-${side}`,
    viewBox: `0 0 ${w * CELL} ${h * CELL}`,
    width: String(w * CELL), height: String(h * CELL),
  });
  let peak = 0;
  for (const row of map) for (const v of row) peak = Math.max(peak, Math.abs(v));
  map.forEach((row, r) => {
    row.forEach((value, c) => {
      const dim = r * w + c;
      const t = peak ? Math.abs(value) / peak : 0;
      const channel = Math.round(255 - t * 200).toString(16).padStart(2, "0");
      const rect = svg("rect", {
        class: "pixel",
        "data-dim": String(dim),
        x: String(c * CELL), y: String(r * CELL),
        width: String(CELL), height: String(CELL),
        fill: `#ff${channel}${channel}`,
      });
      rect.addEventListener("mouseenter", () => linkTwin(dim, true));
      rect.addEventListener("mouseleave", () => linkTwin(dim, false));
      rect.addEventListener("click", () => handlers.onDimensionClick(dim));
      chart.appendChild(rect);
    });
  });
  return chart;
}

function linkTwin(dim: number, on: boolean): void {
  document.querySelectorAll(`.pixel[data-dim="${dim}"]`).forEach((node) => {
    if (on) node.classList.add("linked");
    else node.classList.remove("linked");
  });
}

export function renderDimensionMaps(root: HTMLElement, payload: Dimensions | GradCam,
                                    state: ViewState,
                                    handlers: ExaminationHandlers): void {
  clear(root);
  const switcher = el("div", { class: "entrance-switcher" });
  (["ccpca", "gradcam"] as const).forEach((entrance) => {
    const button = el("button", {
      class: `entrance-button${state.entrance === entrance ? " active" : ""}`,
      "data-entrance": entrance,
    }, entrance);
    button.addEventListener("click", () => handlers.onEntranceSwitch(entrance));
    switcher.appendChild(button);
  });
  root.appendChild(switcher);

  let maps: number[][][];
  let titles: [string, string];
  if (payload.entrance === "ccpca") {
    if (payload.maps) {
      maps = payload.maps;
    } else {
      // flat records: lay the weight vectors out as single-row maps
      maps = payload.weights.map((w) => [w]);
    }
    titles = ["first cPC", "second cPC"];
  } else {
    maps = payload.maps;
    titles = ["stand-alone", "federated"];
  }
  const pair = el("div", { class: "pixel-pair" });
  maps.slice(0, 2).forEach((map, index) => {
    const holder = el("div", { class: "pixel-holder" });
    holder.appendChild(el("h4", {}, titles[index]));
    holder.appendChild(pixelGrid(map, index === 0 ? "left" : "right",
                                 [map.length, map[0].length], handlers));
    pair.appendChild(holder);
  });
  root.appendChild(pair);
}

// --- dimension distribution -------------------------------------------------

export function renderDistribution(root: HTMLElement, payload: Distribution,
                                   state: ViewState,
                                   handlers: ExaminationHandlers): void {
  clear(root);
  const header = el("div", { class: "distribution-header" });
  header.appendChild(el("span", { class: "distribution-dim" },
                        `dimension ${show(payload.dim)}`));
  const toggle = el("button", { class: "scale-toggle" },
                    `y scale: ${state.distributionScale}`);
  toggle.addEventListener("click", () => handlers.onScaleToggle());
  header.appendChild(toggle);
  root.appendChild(header);

  const width = 330;
  const height = 110;
  const chart = svg("svg", {
    class: `distribution-chart scale-${state.distributionScale}`,
    viewBox: `0 0 ${width} ${height * 3}`,
    width: String(width), height: String(height * 3),
  });
  const populations = ["overall", "inconsistent", "consistent"] as const;
  populations.forEach((name, band) => {
    const histogram = payload[name];
    const base = (band + 1) * height - 14;
    chart.appendChild(svg("text", {
      class: "population-label", x: "4", y: String(band * height + 12),
    })).textContent = name;
    if (histogram.empty) {
      const note = svg("text", { class: "empty-histogram", x: "60",
                                 y: String(base - 30) });
      note.textContent = "(empty)";
      chart.appendChild(note);
      return;
    }
    const barWidth = (width - 40) / histogram.percentages.length;
    histogram.percentages.forEach((pct, i) => {
      const magnitude = state.distributionScale === "log"
        ? Math.log10(1 + pct) / Math.log10(101)
        : pct / 100;
      const barHeight = magnitude * (height - 26);
      const bar = svg("rect", {
        class: `distribution-bar ${name}`,
        "data-pct": String(pct),
        x: String(20 + i * barWidth), y: String(base - barHeight),
        width: String(Math.max(barWidth - 1, 0.5)), height: String(barHeight),
      });
      const label = svg("title", {});
      label.textContent = show(pct);
      bar.appendChild(label);
      chart.appendChild(bar);
    });
  });
  root.appendChild(chart);
}

// --- label exploration matrix ------------------------------------------------

export function renderLabelMatrix(root: HTMLElement, matrix: LabelMatrix,
                                  analysis: Analysis, state: ViewState,
                                  handlers: ExaminationHandlers): void {
  clear(root);
  const controls = el("div", { class: "matrix-controls" });
  const gridInput = el("input", { class: "grid-size", type: "number",
                                  min: "2", max: "64", value: String(state.grid) });
  gridInput.addEventListener("change", () =>
    handlers.onGridChange(parseInt(gridInput.value, 10)));
  controls.appendChild(el("label", {}, "grid"));
  controls.appendChild(gridInput);

  const hide = el("button", { class: "hide-scatters" },
                  state.hideScatters ? "show scatters" : "hide scatters");
  hide.addEventListener("click", () => handlers.onHideScattersToggle());
  controls.appendChild(hide);

  const zoomIn = el("button", { class: "zoom-in" }, "+");
  const zoomOut = el("button", { class: "zoom-out" }, "−");
  zoomIn.addEventListener("click", () => handlers.onZoomChange(state.zoom * 1.25));
  zoomOut.addEventListener("click", () => handlers.onZoomChange(state.zoom / 1.25));
  controls.appendChild(zoomOut);
  controls.appendChild(zoomIn);
  root.appendChild(controls);

  const cellSize = 84 * state.zoom;
  const inconsistent = new Set(analysis.inconsistency.ids);
  const selectedMembers = new Set(
    analysis.clusters.find((c) => c.id === state.selectedCluster)?.members ?? []);

  const scroller = el("div", { class: "matrix-scroll" });
  const table = el("table", { class: "label-matrix" });
  const head = el("tr", {});
  head.appendChild(el("th", {}, "fed \\ truth"));
  matrix.column_names.forEach((name) => head.appendChild(el("th", {}, name)));
  table.appendChild(head);

  matrix.rows.forEach((rowLabel, r) => {
    const tr = el("tr", {
      class: r >= matrix.extra_rows_start ? "extra-row" : "truth-row",
      "data-row": String(rowLabel),
    });
    tr.appendChild(el("th", {}, matrix.row_names[r]));
    matrix.columns.forEach((_, c) => {
      const cell = matrix.cells[r][c];
      const td = el("td", { class: "matrix-cell" });
      const chart = svg("svg", {
        viewBox: `0 0 ${cellSize} ${cellSize}`,
        width: String(cellSize), height: String(cellSize),
      });
      const density = matrix.column_density[c];
      const [x0, x1, y0, y1] = density.extent;
      const x = linearScale(x0, x1, 0, cellSize);
      const y = linearScale(y0, y1, cellSize, 0);
      chart.appendChild(columnDensity(density, cellSize));
      if (!state.hideScatters) {
        cell.members.forEach((recordId, i) => {
          const [px, py] = cell.scatter[i];
          const dot = svg("circle", {
            class: `cell-dot ${inconsistent.has(recordId) ? "inconsistent" : "consistent"}`
              + (selectedMembers.has(recordId) ? " in-cluster" : ""),
            "data-record": String(recordId),
            cx: String(x(px)), cy: String(y(py)), r: "2",
          });
          dot.addEventListener("click", () => handlers.onRecordClick(recordId));
          chart.appendChild(dot);
        });
      }
      const counts = el("div", { class: "cell-counts" },
                        `${show(cell.cluster_count)}/${show(cell.local_count)}`);
      td.appendChild(counts);
      td.appendChild(chart);
      tr.appendChild(td);
    });
    table.appendChild(tr);
  });
  scroller.appendChild(table);
  root.appendChild(scroller);
}

function columnDensity(density: LabelMatrix["column_density"][number],
                       size: number): SVGElement {
  const group = svg("g", { class: "column-density" });
  let peak = 0;
  for (const row of density.counts) for (const v of row) peak = Math.max(peak, v);
  const cell = size / density.grid;
  density.counts.forEach((row, gx) => {
    row.forEach((value, gy) => {
      if (!value) return;
      const level = Math.round(255 - (peak ? value / peak : 0) * 160)
        .toString(16).padStart(2, "0");
      group.appendChild(svg("rect", {
        x: String(gx * cell), y: String(size - (gy + 1) * cell),
        width: String(cell), height: String(cell),
        fill: `#${level}ff${level}`,
      }));
    });
  });
  return group;
}

// --- instance panel -----------------------------------------------------------

export function renderInstance(root: HTMLElement, record: RecordDetail | null,
                               labelName: (cls: number | null) => string): void {
  clear(root);
  if (!record) {
    root.appendChild(el("p", { class: "empty-note" }, "click a record in the matrix"));
    return;
  }
  root.appendChild(el("h4", {}, `record ${show(record.id)}`));
  const rows: [string, string][] = [
    ["ground truth", labelName(record.true_label)],
    ["stand-alone output", labelName(record.standalone_label)],
    ["federated output", labelName(record.federated_label)],
  ];
  const table = el("table", { class: "instance-table" });
  for (const [key, value] of rows) {
    const tr = el("tr", {});
    tr.appendChild(el("th", {}, key));
    tr.appendChild(el("td", { "data-field": key }, value));
    table.appendChild(tr);
  }
  root.appendChild(table);

  if (record.shape.length === 3) {
    const [h, w] = record.shape;
    const chart = svg("svg", { class: "instance-image",
                               viewBox: `0 0 ${w * 6} ${h * 6}`,
                               width: String(w * 6), height: String(h * 6) });
    for (let r = 0; r < h; r += 1) {
      for (let c = 0; c < w; c += 1) {
        const value = record.features[r * w + c];
        const level = Math.round(255 - Math.max(0, Math.min(1, value)) * 255)
          .toString(16).padStart(2, "0");
        chart.appendChild(svg("rect", {
          x: String(c * 6), y: String(r * 6), width: "6", height: "6",
          fill: `#${level}${level}${level}`,
        }));
      }
    }
    root.appendChild(chart);
  }
}

// --- annotations panel ----------------------------------------------------------

export function renderAnnotations(root: HTMLElement, annotations: Annotation[],
                                  state: ViewState,
                                  handlers: ExaminationHandlers): void {
  clear(root);
  const creator = el("div", { class: "annotation-create" });
  const note = el("input", { class: "annotation-note", type: "text",
                             placeholder: "finding note" });
  const button = el("button", { class: "annotate-cluster" }, "annotate cluster");
  if (state.selectedCluster == null) button.setAttribute("disabled", "disabled");
  button.addEventListener("click", () => handlers.onAnnotateCluster(note.value));
  creator.appendChild(note);
  creator.appendChild(button);
  root.appendChild(creator);

  const list = el("ul", { class: "annotation-list" });
  for (const annotation of annotations) {
    const item = el("li", { class: "annotation-item",
                            "data-annotation": String(annotation.id) });
    item.appendChild(el("span", { class: "annotation-round" },
                        `round ${show(annotation.round)}`));
    const shown = annotation.record_ids.slice(0, 6).map((i) => show(i)).join(", ");
    const more = annotation.record_ids.length > 6 ? "…" : "";
    item.appendChild(el("span", { class: "annotation-records" },
                        `records ${shown}${more}`));
    item.appendChild(el("span", { class: "annotation-text" }, annotation.note));
    const remove = el("button", { class: "annotation-delete" }, "delete");
    remove.addEventListener("click", () => handlers.onAnnotationDelete(annotation.id));
    item.appendChild(remove);
    list.appendChild(item);
  }
  root.appendChild(list);
}
