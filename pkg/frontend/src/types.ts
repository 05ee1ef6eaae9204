// Payload shapes of the /v1 JSON API. The UI never derives numbers of its
// own: everything rendered comes verbatim from these payloads.

export interface Metrics {
  rounds: number[];
  train_loss: number[];
  test_acc: number[];
  total_acc: number[];
}

export interface Trajectory {
  rounds: number[];
  federated: [number, number][];
  local: [number, number][];
  cosines: (number | null)[];
  layer: string;
  layers: string[];
  basis: number[][];
}

export interface Inconsistency {
  round: number;
  m: number;
  ids: number[];
  standalone_labels: number[];
  federated_labels: number[];
}

export interface Projection {
  points: [number, number][];
  basis: number[][];
  method: string;
  alpha?: number;
}

export interface ClusterSummary {
  id: number;
  members: number[];
  size: number;
  accuracy: number | null;
  hull: [number, number][];
}

export interface DensityGrid {
  grid: number;
  extent: [number, number, number, number];
  counts: number[][];
}

export interface Analysis {
  run: string;
  round: number;
  source: string;
  k: number;
  alpha: number;
  labels_available: boolean;
  inconsistency: Inconsistency;
  projection: Projection | null;
  clusters: ClusterSummary[];
  density: DensityGrid | null;
  recommended: { k: number | null; alpha: number | null };
}

export interface Dimensions {
  entrance: "ccpca";
  cluster: number;
  alpha: number;
  shape: number[];
  weights: number[][];
  channel?: number;
  maps?: number[][][];
}

export interface GradCam {
  entrance: "gradcam";
  cluster: number;
  layer: string;
  maps: number[][][];
}

export interface Histogram {
  empty: boolean;
  percentages: number[];
}

export interface Distribution {
  dim: number;
  bins: number;
  lo: number;
  hi: number;
  scale: string;
  overall: Histogram;
  inconsistent: Histogram;
  consistent: Histogram;
}

export interface MatrixCell {
  members: number[];
  cluster_count: number;
  local_count: number;
  scatter: [number, number][];
}

export interface LabelMatrix {
  grid: number;
  rows: number[];
  columns: number[];
  row_names: string[];
  column_names: string[];
  extra_rows_start: number;
  cells: MatrixCell[][];
  column_density: DensityGrid[];
  cluster: number | null;
}

export interface RecordDetail {
  id: number;
  features: number[];
  shape: number[];
  true_label: number | null;
  standalone_label: number;
  federated_label: number;
  inconsistent: boolean;
}

export interface Annotation {
  id: number;
  round: number;
  record_ids: number[];
  note: string;
  source_cluster: number | null;
}

export interface TrackRow {
  record: number;
  standalone_label: number;
  federated_label: number;
  still_inconsistent: boolean;
}

export interface TrackResult {
  annotation: number;
  round: number;
  records: TrackRow[];
  inconsistent_count: number;
}

export interface RunStatus {
  state: string;
  round?: number;
  rounds?: number;
  error?: string;
}

export interface ViewState {
  runId: string | null;
  selectedRound: number | null;
  selectedCluster: number | null;
  k: number | null;
  alpha: number | null;
  metric: keyof Omit<Metrics, "rounds">;
  entrance: "ccpca" | "gradcam";
  channel: number;
  grid: number;
  layer: string;
  topLayer: "inconsistent" | "consistent";
  hideScatters: boolean;
  distributionScale: "linear" | "log";
  zoom: number;
}

export function initialViewState(): ViewState {
  return {
    runId: null,
    selectedRound: null,
    selectedCluster: null,
    k: null,
    alpha: null,
    metric: "train_loss",
    entrance: "ccpca",
    channel: 0,
    grid: 16,
    layer: "all",
    topLayer: "inconsistent",
    hideScatters: false,
    distributionScale: "linear",
    zoom: 1,
  };
}
