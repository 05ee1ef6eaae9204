// Learning-process monitor: performance chart with a round handle and
// annotation icons, plus the parameter-exchange projection.

import { clear, el, extentOf, grayscale, linearScale, show, svg } from "../dom.js";
import type { Annotation, Metrics, Trajectory, ViewState } from "../types.js";

const WIDTH = 420;
const HEIGHT = 140;
const PAD = 28;

export interface MonitorHandlers {
  onSelectRound(round: number): void;
  onMetricSwitch(metric: ViewState["metric"]): void;
  onLayerSwitch(layer: string): void;
  onAnnotationOpen(annotation: Annotation): void;
  onAnnotationDelete(annotation: Annotation): void;
}

export function renderPerformance(root: HTMLElement, metrics: Metrics,
                                  annotations: Annotation[], state: ViewState,
                                  handlers: MonitorHandlers): void {
  clear(root);
  const switcher = el("div", { class: "metric-switcher" });
  (["train_loss", "test_acc", "total_acc"] as const).forEach((name) => {
    const button = el("button", {
      class: `metric-button${state.metric === name ? " active" : ""}`,
      "data-metric": name,
    }, name.replace("_", " "));
    button.addEventListener("click", () => handlers.onMetricSwitch(name));
    switcher.appendChild(button);
  });
  root.appendChild(switcher);

  const series = metrics[state.metric];
  const chart = svg("svg", { class: "performance-chart", viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
                             width: String(WIDTH), height: String(HEIGHT) });
  const x = linearScale(metrics.rounds[0], metrics.rounds[metrics.rounds.length - 1],
                        PAD, WIDTH - PAD);
  const [lo, hi] = extentOf(series);
  const y = linearScale(lo, hi, HEIGHT - PAD, PAD);

  const path = metrics.rounds
    .map((round, i) => `${i ? "L" : "M"}${x(round)},${y(series[i])}`).join(" ");
  chart.appendChild(svg("path", { d: path, class: "metric-line", fill: "none",
                                  stroke: "#555" }));

  // value labels at the extremes, verbatim payload numbers
  const axis = el("div", { class: "metric-extent" });
  axis.appendChild(el("span", { class: "metric-min" }, show(lo)));
  axis.appendChild(el("span", { class: "metric-max" }, show(hi)));

  metrics.rounds.forEach((round, i) => {
    const hit = svg("rect", {
      class: "round-hit",
      "data-round": String(round),
      x: String(x(round) - 5), y: "0", width: "10", height: String(HEIGHT),
      fill: "transparent",
    });
    hit.addEventListener("click", () => handlers.onSelectRound(round));
    chart.appendChild(hit);
    chart.appendChild(svg("circle", {
      class: "metric-point", cx: String(x(round)), cy: String(y(series[i])), r: "2",
    }));
  });

  if (state.selectedRound != null) {
    chart.appendChild(svg("line", {
      class: "round-handle",
      x1: String(x(state.selectedRound)), x2: String(x(state.selectedRound)),
      y1: "0", y2: String(HEIGHT), stroke: "#c23b22",
    }));
  }

  for (const annotation of annotations) {
    const icon = svg("text", {
      class: "annotation-icon",
      "data-annotation": String(annotation.id),
      x: String(x(annotation.round) - 4), y: "12",
    });
    icon.textContent = "✉";
    icon.addEventListener("click", () => handlers.onAnnotationOpen(annotation));
    icon.addEventListener("contextmenu", (event) => {
      event.preventDefault();
      handlers.onAnnotationDelete(annotation);
    });
    chart.appendChild(icon);
  }

  root.appendChild(chart);
  root.appendChild(axis);
  if (state.selectedRound != null) {
    root.appendChild(el("div", { class: "selected-round" },
                        `round ${show(state.selectedRound)}`));
  }
}

export function renderProjection(root: HTMLElement, trajectory: Trajectory,
                                 state: ViewState, handlers: MonitorHandlers): void {
  clear(root);

  const picker = el("select", { class: "layer-picker" });
  for (const layer of ["all", ...trajectory.layers]) {
    const option = el("option", { value: layer }, layer);
    if (layer === state.layer) option.setAttribute("selected", "selected");
    picker.appendChild(option);
  }
  picker.addEventListener("change", () => handlers.onLayerSwitch(picker.value));
  root.appendChild(picker);

  const chart = svg("svg", { class: "projection-chart", viewBox: `0 0 ${WIDTH} ${WIDTH}`,
                             width: String(WIDTH), height: String(WIDTH) });
  const xs = trajectory.federated.concat(trajectory.local).map((p) => p[0]);
  const ys = trajectory.federated.concat(trajectory.local).map((p) => p[1]);
  const [x0, x1] = extentOf(xs);
  const [y0, y1] = extentOf(ys);
  const x = linearScale(x0, x1, PAD, WIDTH - PAD);
  const y = linearScale(y0, y1, WIDTH - PAD, PAD);

  const count = trajectory.rounds.length;
  // gray polyline over federated points, grayscale encoding the time sequence
  for (let i = 1; i < count; i += 1) {
    chart.appendChild(svg("line", {
      class: "federated-segment",
      x1: String(x(trajectory.federated[i - 1][0])),
      y1: String(y(trajectory.federated[i - 1][1])),
      x2: String(x(trajectory.federated[i][0])),
      y2: String(y(trajectory.federated[i][1])),
      stroke: grayscale(i / Math.max(count - 1, 1)),
      "data-shade": String(i / Math.max(count - 1, 1)),
    }));
  }
  // brown arrows from fed_{i-1} to local_i, darkness encoding |cosine|
  for (let i = 1; i < count; i += 1) {
    const cosine = trajectory.cosines[i];
    const darkness = cosine == null ? 0.15 : Math.abs(cosine);
    const arrow = svg("line", {
      class: "local-arrow",
      "data-round": String(trajectory.rounds[i]),
      x1: String(x(trajectory.federated[i - 1][0])),
      y1: String(y(trajectory.federated[i - 1][1])),
      x2: String(x(trajectory.local[i][0])),
      y2: String(y(trajectory.local[i][1])),
      stroke: `rgba(139,69,19,${0.2 + 0.8 * darkness})`,
      "data-cosine": cosine == null ? "" : String(cosine),
    });
    chart.appendChild(arrow);
  }
  trajectory.rounds.forEach((round, i) => {
    const point = svg("circle", {
      class: "federated-point",
      "data-round": String(round),
      cx: String(x(trajectory.federated[i][0])),
      cy: String(y(trajectory.federated[i][1])),
      r: "3",
    });
    point.addEventListener("click", () => handlers.onSelectRound(round));
    chart.appendChild(point);
    if (round === state.selectedRound) {
      chart.appendChild(svg("circle", {
        class: "round-highlight",
        cx: String(x(trajectory.federated[i][0])),
        cy: String(y(trajectory.federated[i][1])),
        r: "8", fill: "none", stroke: "#c23b22",
      }));
    }
  });
  root.appendChild(chart);
}
