// Fixture replay: the three modules render from the exported fixture set
// with the API stubbed; interactions round-trip and the DOM never shows a
// number the API did not send.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/main.js";
import { FixtureServer } from "./stub.js";

let server: FixtureServer;
let app: App;
let root: HTMLElement;
let consoleErrors: unknown[][];

function click(node: Element | null): void {
  expect(node, "click target exists").toBeTruthy();
  node!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

async function settle(): Promise<void> {
  // drain all pending fetch/render chains; macrotask turns flush microtasks
  for (let i = 0; i < 5; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

beforeEach(async () => {
  consoleErrors = [];
  vi.spyOn(console, "error").mockImplementation((...args) => {
    consoleErrors.push(args);
  });
  document.body.innerHTML = '<main id="root"></main>';
  root = document.getElementById("root") as HTMLElement;
  server = new FixtureServer();
  app = new App(new ApiClient("/v1", server.fetch), root);
  await app.boot();
  await settle();
});

afterEach(() => {
  vi.restoreAllMocks();
});

describe("boot", () => {
  it("renders all three modules from fixtures with zero console errors", () => {
    expect(root.querySelector("#module-monitor .performance-chart")).toBeTruthy();
    expect(root.querySelector("#module-monitor .projection-chart")).toBeTruthy();
    expect(root.querySelector("#module-comparison .comparison-scatter")).toBeTruthy();
    expect(root.querySelectorAll("#module-comparison .cluster-glyph").length)
      .toBe(app.analysis!.clusters.length);
    expect(root.querySelector("#module-examination .annotation-create")).toBeTruthy();
    expect(consoleErrors).toEqual([]);
  });

  it("selects the last round by default and draws its handle", () => {
    const last = app.metrics!.rounds[app.metrics!.rounds.length - 1];
    expect(app.state.selectedRound).toBe(last);
    expect(root.querySelector(".round-handle")).toBeTruthy();
    expect(root.querySelector(".selected-round")!.textContent)
      .toContain(String(last));
  });

  it("draws the scatter with one dot per projected record", () => {
    const dots = root.querySelectorAll(".comparison-scatter .record-dot");
    expect(dots.length).toBe(app.analysis!.projection!.points.length);
    const brown = root.querySelectorAll(".comparison-scatter .record-dot.inconsistent");
    expect(brown.length).toBe(app.analysis!.inconsistency.m);
  });

  it("grayscale of the federated polyline is monotone in the round index", () => {
    const shades = [...root.querySelectorAll(".federated-segment")]
      .map((node) => Number(node.getAttribute("data-shade")));
    const sorted = [...shades].sort((a, b) => a - b);
    expect(shades).toEqual(sorted);
  });
});

describe("round selection", () => {
  it("clicking the performance chart issues an analyze request for that round", async () => {
    const before = server.requestCount((r) => r.url.includes("/analyze"));
    click(root.querySelector('.round-hit[data-round="5"]'));
    await settle();
    expect(app.state.selectedRound).toBe(5);
    expect(server.requestCount((r) => r.url.includes("/rounds/5/analyze")))
      .toBe(1);
    expect(server.requestCount((r) => r.url.includes("/analyze"))).toBe(before + 1);
    expect(root.querySelector(".round-handle")).toBeTruthy();
  });

  it("clicking a projection point also selects the round and highlights it", async () => {
    click(root.querySelector('.federated-point[data-round="4"]'));
    await settle();
    expect(app.state.selectedRound).toBe(4);
    expect(root.querySelector(".round-highlight")).toBeTruthy();
  });

  it("metric switcher re-renders without a refetch", () => {
    const before = server.log.length;
    click(root.querySelector('.metric-button[data-metric="test_acc"]'));
    expect(app.state.metric).toBe("test_acc");
    expect(root.querySelector(".metric-button.active")!.getAttribute("data-metric"))
      .toBe("test_acc");
    expect(server.log.length).toBe(before);
  });
});

describe("glyph selection", () => {
  it("clicking a glyph selects the cluster and loads the examination views", async () => {
    const glyph = root.querySelector('.cluster-glyph[data-cluster="3"]');
    click(glyph);
    await settle();
    expect(app.state.selectedCluster).toBe(3);
    expect(root.querySelector('.cluster-glyph[data-cluster="3"]')!
      .classList.contains("selected")).toBe(true);
    expect(server.requestCount((r) =>
      r.url.includes("/analysis/cluster/3/dimensions"))).toBe(1);
    expect(server.requestCount((r) =>
      r.url.includes("/analysis/label-matrix"))).toBe(1);
    expect(root.querySelectorAll(".pixel-map").length).toBe(2);
    expect(root.querySelectorAll(".label-matrix tr").length).toBeGreaterThan(1);
  });

  it("glyph order follows the API ordering", () => {
    const order = [...root.querySelectorAll(".cluster-glyph")]
      .map((node) => Number(node.getAttribute("data-cluster")));
    expect(order).toEqual(app.analysis!.clusters.map((c) => c.id));
  });

  it("top-layer toggle flips which population is drawn last", () => {
    click(root.querySelector(".top-layer-toggle"));
    const dots = [...root.querySelectorAll(".comparison-scatter .record-dot")];
    const lastDot = dots[dots.length - 1];
    expect(lastDot.classList.contains("consistent")).toBe(true);
  });
});

describe("pixel hover-linking", () => {
  beforeEach(async () => {
    click(root.querySelector('.cluster-glyph[data-cluster="0"]'));
    await settle();
  });

  it("hovering a pixel highlights the same dimension in the twin map", () => {
    const left = root.querySelector('.pixel-map-left .pixel[data-dim="5"]')!;
    left.dispatchEvent(new Event("mouseenter"));
    const twin = root.querySelector('.pixel-map-right .pixel[data-dim="5"]')!;
    expect(twin.classList.contains("linked")).toBe(true);
    left.dispatchEvent(new Event("mouseleave"));
    expect(twin.classList.contains("linked")).toBe(false);
  });

  it("clicking a pixel loads that dimension's distribution", async () => {
    click(root.querySelector('.pixel-map-left .pixel[data-dim="16"]'));
    await settle();
    expect(server.requestCount((r) =>
      r.url.includes("/analysis/dimension/16/distribution"))).toBe(1);
    expect(root.querySelectorAll(".distribution-bar").length).toBeGreaterThan(0);
  });

  it("the log-scale toggle re-renders without refetching", async () => {
    click(root.querySelector('.pixel-map-left .pixel[data-dim="16"]'));
    await settle();
    const before = server.log.length;
    click(root.querySelector(".scale-toggle"));
    expect(app.state.distributionScale).toBe("log");
    expect(root.querySelector(".distribution-chart")!.classList
      .contains("scale-log")).toBe(true);
    expect(server.log.length).toBe(before);
  });

  it("grad-cam entrance falls back to ccpca on an mlp run", async () => {
    click(root.querySelector('.entrance-button[data-entrance="gradcam"]'));
    await settle();
    expect(server.requestCount((r) => r.url.includes("entrance=gradcam"))).toBe(1);
    expect(app.state.entrance).toBe("ccpca");
    expect(root.querySelectorAll(".pixel-map").length).toBe(2);
    expect(consoleErrors).toEqual([]);
  });
});

describe("label matrix and instance panel", () => {
  beforeEach(async () => {
    click(root.querySelector('.cluster-glyph[data-cluster="0"]'));
    await settle();
  });

  it("extra rows sit below the ground-truth rows", () => {
    const rows = [...root.querySelectorAll(".label-matrix tr")].slice(1);
    const extraStart = rows.findIndex((row) => row.classList.contains("extra-row"));
    if (extraStart !== -1) {
      expect(rows.slice(extraStart).every((row) =>
        row.classList.contains("extra-row"))).toBe(true);
    }
    expect(rows.length).toBe(app.labelMatrix!.rows.length);
  });

  it("hide-scatters removes the cell dots without refetching", () => {
    expect(root.querySelectorAll(".cell-dot").length).toBeGreaterThan(0);
    const before = server.log.length;
    click(root.querySelector(".hide-scatters"));
    expect(root.querySelectorAll(".cell-dot").length).toBe(0);
    expect(server.log.length).toBe(before);
  });

  it("clicking a record dot fills the instance panel with payload labels", async () => {
    const dot = root.querySelector(".cell-dot");
    click(dot);
    await settle();
    expect(server.requestCount((r) => /\/analysis\/record\/\d+$/.test(r.url)))
      .toBe(1);
    const panel = root.querySelector("#exam-instance")!;
    expect(panel.textContent).toContain("ground truth");
    expect(panel.textContent).toContain("stand-alone output");
    expect(panel.textContent).toContain("federated output");
  });

  it("changing the grid size refetches the matrix", async () => {
    const input = root.querySelector(".grid-size") as HTMLInputElement;
    input.value = "8";
    input.dispatchEvent(new Event("change"));
    await settle();
    expect(server.requestCount((r) => r.url.includes("grid=8"))).toBe(1);
    expect(app.state.grid).toBe(8);
  });
});

describe("annotations", () => {
  beforeEach(async () => {
    click(root.querySelector('.cluster-glyph[data-cluster="0"]'));
    await settle();
  });

  it("create round-trips through the API, appears in the list and the timeline", async () => {
    const note = root.querySelector(".annotation-note") as HTMLInputElement;
    note.value = "typographic style";
    click(root.querySelector(".annotate-cluster"));
    await settle();
    expect(server.requestCount((r) =>
      r.method === "POST" && r.url.endsWith("/annotations"))).toBe(1);
    const item = root.querySelector(".annotation-item");
    expect(item).toBeTruthy();
    expect(item!.textContent).toContain("typographic style");
    expect(root.querySelector(".annotation-icon")).toBeTruthy();
    const badge = root.querySelector(".glyph-overlap");
    expect(badge).toBeTruthy();
    const members = app.analysis!.clusters.find((c) => c.id === 0)!.members;
    expect(badge!.textContent).toBe(`overlap ${members.length}`);
  });

  it("delete removes the annotation and its timeline icon", async () => {
    (root.querySelector(".annotation-note") as HTMLInputElement).value = "x";
    click(root.querySelector(".annotate-cluster"));
    await settle();
    expect(root.querySelector(".annotation-icon")).toBeTruthy();
    click(root.querySelector(".annotation-delete"));
    await settle();
    expect(server.requestCount((r) => r.method === "DELETE")).toBe(1);
    expect(root.querySelector(".annotation-item")).toBeNull();
    expect(root.querySelector(".annotation-icon")).toBeNull();
  });

  it("right-clicking the timeline icon deletes the annotation", async () => {
    (root.querySelector(".annotation-note") as HTMLInputElement).value = "x";
    click(root.querySelector(".annotate-cluster"));
    await settle();
    const icon = root.querySelector(".annotation-icon")!;
    icon.dispatchEvent(new MouseEvent("contextmenu", { bubbles: true }));
    await settle();
    expect(server.requestCount((r) => r.method === "DELETE")).toBe(1);
    expect(root.querySelector(".annotation-icon")).toBeNull();
  });
});

describe("numeric audit", () => {
  it("every number in the DOM exists verbatim in a recorded API payload", async () => {
    // drive a full pass so all views are populated
    click(root.querySelector('.cluster-glyph[data-cluster="0"]'));
    await settle();
    click(root.querySelector('.pixel-map-left .pixel[data-dim="16"]'));
    await settle();
    click(root.querySelector(".cell-dot"));
    await settle();
    (root.querySelector(".annotation-note") as HTMLInputElement).value = "audit";
    click(root.querySelector(".annotate-cluster"));
    await settle();

    const vocabulary = app.api.numberVocabulary();
    const walker = document.createTreeWalker(root, NodeFilter.SHOW_TEXT);
    const offenders: string[] = [];
    while (walker.nextNode()) {
      const text = walker.currentNode.textContent ?? "";
      for (const match of text.matchAll(/\d+(?:\.\d+)?(?:e[+-]?\d+)?/gi)) {
        if (!vocabulary.has(match[0])) {
          offenders.push(`${match[0]} in "${text.trim()}"`);
        }
      }
    }
    expect(offenders).toEqual([]);
  });
});
