// Application shell: wires the three modules to the /v1 API.
// Every number on screen comes verbatim from a recorded API payload.

import { ApiClient, ApiError } from "./api.js";
import { clear, el } from "./dom.js";
import type {
  Analysis, Annotation, Dimensions, Distribution, GradCam, LabelMatrix,
  Metrics, RecordDetail, Trajectory, ViewState,
} from "./types.js";
import { initialViewState } from "./types.js";
import { renderComparisonScatter, renderGlyphList } from "./views/comparison.js";
import {
  renderAnnotations, renderDimensionMaps, renderDistribution, renderInstance,
  renderLabelMatrix,
} from "./views/examination.js";
import { renderPerformance, renderProjection } from "./views/monitor.js";

const POLL_INTERVAL_MS = 1000;

export class App {
  state: ViewState = initialViewState();
  metrics: Metrics | null = null;
  trajectory: Trajectory | null = null;
  analysis: Analysis | null = null;
  dimensions: Dimensions | GradCam | null = null;
  distribution: Distribution | null = null;
  labelMatrix: LabelMatrix | null = null;
  instance: RecordDetail | null = null;
  annotations: Annotation[] = [];
  overlaps = new Map<number, number>();

  private analyzeController: AbortController | null = null;

  constructor(public api: ApiClient, public root: HTMLElement) {}

  // --- boot ----------------------------------------------------------------

  async boot(): Promise<void> {
    this.scaffold();
    const { runs } = await this.api.listRuns();
    if (!runs.length) {
      this.section("monitor-performance").textContent = "no runs yet";
      return;
    }
    this.state.runId = runs[0];
    await this.waitUntilDone();
    this.metrics = await this.api.metrics(this.state.runId);
    this.trajectory = await this.api.paramProjection(this.state.runId, this.state.layer);
    this.annotations = (await this.api.listAnnotations()).annotations;
    this.renderMonitor();
    const lastRound = this.metrics.rounds[this.metrics.rounds.length - 1];
    await this.selectRound(lastRound);
  }

  private async waitUntilDone(): Promise<void> {
    for (;;) {
      const status = await this.api.status(this.state.runId!);
      this.section("run-status").textContent = status.state;
      if (status.state === "done" || status.state === "failed") return;
      await new Promise((resolve) => setTimeout(resolve, POLL_INTERVAL_MS));
    }
  }

  private scaffold(): void {
    clear(this.root);
    const layout: Array<[string, string[]]> = [
      ["module-monitor", ["run-status", "monitor-performance", "monitor-projection"]],
      ["module-comparison", ["comparison-scatter", "comparison-glyphs"]],
      ["module-examination", ["exam-dimensions", "exam-distribution",
                              "exam-matrix", "exam-instance", "exam-annotations"]],
    ];
    for (const [module, sections] of layout) {
      const holder = el("section", { id: module, class: "module" });
      for (const name of sections) holder.appendChild(el("div", { id: name }));
      this.root.appendChild(holder);
    }
  }

  section(id: string): HTMLElement {
    return this.root.querySelector(`#${id}`) as HTMLElement;
  }

  // --- interactions ----------------------------------------------------------

  async selectRound(round: number): Promise<void> {
    this.state.selectedRound = round;
    this.renderMonitor();
    this.analyzeController?.abort();
    this.analyzeController = new AbortController();
    let analysis: Analysis;
    try {
      analysis = await this.api.analyze(this.state.runId!, round,
                                        this.analyzeController.signal);
    } catch (error) {
      if ((error as Error).name === "AbortError") return;
      throw error;
    }
    this.analysis = analysis;
    this.state.k = analysis.k;
    this.state.alpha = analysis.alpha;
    this.state.selectedCluster = null;
    this.dimensions = null;
    this.distribution = null;
    this.labelMatrix = null;
    this.instance = null;
    await this.refreshOverlaps();
    this.renderComparison();
    this.renderExamination();
  }

  async selectCluster(clusterId: number): Promise<void> {
    this.state.selectedCluster = clusterId;
    this.renderComparison();
    await this.loadDimensions();
    if (this.analysis?.labels_available) {
      this.labelMatrix = await this.api.labelMatrix(this.state.grid, clusterId);
    }
    this.renderExamination();
  }

  private async loadDimensions(): Promise<void> {
    if (this.state.selectedCluster == null) return;
    try {
      this.dimensions = await this.api.dimensions(
        this.state.selectedCluster, this.state.entrance,
        this.state.entrance === "ccpca" ? this.state.channel : undefined);
    } catch (error) {
      if (error instanceof ApiError && error.code === "unsupported-architecture") {
        // Grad-CAM needs a conv model; fall back to the contrastive entrance
        this.state.entrance = "ccpca";
        this.dimensions = await this.api.dimensions(this.state.selectedCluster,
                                                    "ccpca", this.state.channel);
        return;
      }
      throw error;
    }
  }

  async refreshOverlaps(): Promise<void> {
    this.overlaps.clear();
    if (!this.analysis || !this.annotations.length) return;
    const ids = this.annotations.map((a) => a.id);
    for (const cluster of this.analysis.clusters) {
      const combined = await this.api.setCombine(ids, cluster.id, "intersection");
      if (combined.count > 0) this.overlaps.set(cluster.id, combined.count);
    }
  }

  async showDistribution(dim: number): Promise<void> {
    this.distribution = await this.api.distribution(dim);
    this.renderExamination();
  }

  toggleDistributionScale(): void {
    // re-render only; the cached payload is reused without a refetch
    this.state.distributionScale =
      this.state.distributionScale === "linear" ? "log" : "linear";
    this.renderExamination();
  }

  async showRecord(recordId: number): Promise<void> {
    this.instance = await this.api.record(recordId);
    this.renderExamination();
  }

  async changeGrid(grid: number): Promise<void> {
    this.state.grid = grid;
    if (this.analysis?.labels_available && this.state.selectedCluster != null) {
      this.labelMatrix = await this.api.labelMatrix(grid, this.state.selectedCluster);
    }
    this.renderExamination();
  }

  async annotateSelectedCluster(note: string): Promise<void> {
    if (!this.analysis || this.state.selectedCluster == null) return;
    const cluster = this.analysis.clusters.find(
      (c) => c.id === this.state.selectedCluster);
    if (!cluster) return;
    await this.api.annotate(cluster.members, note, this.analysis.round, cluster.id);
    this.annotations = (await this.api.listAnnotations()).annotations;
    await this.refreshOverlaps();
    this.renderMonitor();
    this.renderComparison();
    this.renderExamination();
  }

  async deleteAnnotation(id: number): Promise<void> {
    await this.api.deleteAnnotation(id);
    this.annotations = (await this.api.listAnnotations()).annotations;
    await this.refreshOverlaps();
    this.renderMonitor();
    this.renderComparison();
    this.renderExamination();
  }

  async switchLayer(layer: string): Promise<void> {
    this.state.layer = layer;
    this.trajectory = await this.api.paramProjection(this.state.runId!, layer);
    this.renderMonitor();
  }

  async switchEntrance(entrance: ViewState["entrance"]): Promise<void> {
    this.state.entrance = entrance;
    await this.loadDimensions();
    this.renderExamination();
  }

  // --- rendering -----------------------------------------------------------

  renderMonitor(): void {
    if (!this.metrics) return;
    const handlers = {
      onSelectRound: (round: number) => { void this.selectRound(round); },
      onMetricSwitch: (metric: ViewState["metric"]) => {
        this.state.metric = metric;
        this.renderMonitor();
      },
      onLayerSwitch: (layer: string) => { void this.switchLayer(layer); },
      onAnnotationOpen: (annotation: Annotation) => {
        this.section("exam-annotations").querySelector(
          `[data-annotation="${annotation.id}"]`)?.classList.add("opened");
      },
      onAnnotationDelete: (annotation: Annotation) => {
        void this.deleteAnnotation(annotation.id);
      },
    };
    renderPerformance(this.section("monitor-performance"), this.metrics,
                      this.annotations, this.state, handlers);
    if (this.trajectory) {
      renderProjection(this.section("monitor-projection"), this.trajectory,
                       this.state, handlers);
    }
  }

  renderComparison(): void {
    if (!this.analysis) return;
    const handlers = {
      onSelectCluster: (clusterId: number) => { void this.selectCluster(clusterId); },
      onTopLayerToggle: () => {
        this.state.topLayer =
          this.state.topLayer === "inconsistent" ? "consistent" : "inconsistent";
        this.renderComparison();
      },
    };
    renderComparisonScatter(this.section("comparison-scatter"), this.analysis,
                            this.state, handlers);
    renderGlyphList(this.section("comparison-glyphs"), this.analysis, this.state,
                    this.overlaps, handlers);
  }

  renderExamination(): void {
    const handlers = {
      onDimensionClick: (dim: number) => { void this.showDistribution(dim); },
      onScaleToggle: () => this.toggleDistributionScale(),
      onRecordClick: (recordId: number) => { void this.showRecord(recordId); },
      onGridChange: (grid: number) => { void this.changeGrid(grid); },
      onHideScattersToggle: () => {
        this.state.hideScatters = !this.state.hideScatters;
        this.renderExamination();
      },
      onZoomChange: (zoom: number) => {
        this.state.zoom = zoom;
        this.renderExamination();
      },
      onAnnotateCluster: (note: string) => { void this.annotateSelectedCluster(note); },
      onAnnotationDelete: (id: number) => { void this.deleteAnnotation(id); },
      onEntranceSwitch: (entrance: ViewState["entrance"]) => {
        void this.switchEntrance(entrance);
      },
    };
    const dims = this.section("exam-dimensions");
    if (this.dimensions) {
      renderDimensionMaps(dims, this.dimensions, this.state, handlers);
    } else {
      clear(dims);
      dims.appendChild(el("p", { class: "empty-note" }, "select a cluster"));
    }
    const dist = this.section("exam-distribution");
    if (this.distribution) {
      renderDistribution(dist, this.distribution, this.state, handlers);
    } else {
      clear(dist);
    }
    const matrix = this.section("exam-matrix");
    if (this.labelMatrix && this.analysis) {
      renderLabelMatrix(matrix, this.labelMatrix, this.analysis, this.state, handlers);
    } else {
      clear(matrix);
    }
    renderInstance(this.section("exam-instance"), this.instance,
                   (cls) => this.labelName(cls));
    renderAnnotations(this.section("exam-annotations"), this.annotations,
                      this.state, handlers);
  }

  labelName(cls: number | null): string {
    if (cls == null) return "–";
    if (this.labelMatrix) {
      const i = this.labelMatrix.rows.indexOf(cls);
      if (i >= 0) return this.labelMatrix.row_names[i];
    }
    return `class-${cls}`;
  }
}

export function mount(root: HTMLElement, base = "/v1"): App {
  const app = new App(new ApiClient(base), root);
  void app.boot();
  return app;
}

declare global {
  interface Window { hetlab?: App }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.hetlab = mount(document.getElementById("app") as HTMLElement);
}
