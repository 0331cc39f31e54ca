// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";
import { renderComparison, renderPlane } from "../src/chart.js";
import type { ComparisonSeries } from "../src/session.js";
import type { WhatIfResponse } from "../src/types.js";

let host: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "<div id='host'></div>";
  host = document.getElementById("host")!;
});

const SERIES: ComparisonSeries = {
  stateName: "temperature",
  observed: [
    { t: 0, v: 16.5 },
    { t: 10, v: 17.25 },
    { t: 20, v: 18.125 },
  ],
  predicted: [
    { t: 10, v: 17.0625 },
    { t: 20, v: 18.0 },
  ],
  spawnTime: 10,
};

describe("comparison chart", () => {
  it("draws observed dotted, predicted solid, and a spawn marker", () => {
    renderComparison(host, SERIES);
    const observed = host.querySelector("polyline.observed")!;
    const predicted = host.querySelector("polyline.predicted")!;
    expect(observed.getAttribute("stroke-dasharray")).toBeTruthy();
    expect(predicted.hasAttribute("stroke-dasharray")).toBe(false);
    const marker = host.querySelector("line.spawn-marker")!;
    expect(marker).toBeTruthy();
    expect(marker.getAttribute("x1")).toBe(marker.getAttribute("x2"));
  });

  it("labels the axes and the marker with payload values verbatim", () => {
    renderComparison(host, SERIES);
    const labels = [...host.querySelectorAll("text[data-value]")].map((n) =>
      n.getAttribute("data-value"),
    );
    expect(labels).toContain("0"); // t min
    expect(labels).toContain("20"); // t max
    expect(labels).toContain("16.5"); // v min
    expect(labels).toContain("18.125"); // v max
    expect(labels).toContain("10"); // spawn instant
  });

  it("omits the marker when the spawn instant is outside the plotted range", () => {
    renderComparison(host, { ...SERIES, spawnTime: 99 });
    expect(host.querySelector("line.spawn-marker")).toBeNull();
  });

  it("renders a placeholder and no svg for an empty selection", () => {
    renderComparison(host, null);
    expect(host.querySelector("svg")).toBeNull();
    expect(host.querySelector(".chart-empty")).toBeTruthy();

    renderComparison(host, { ...SERIES, observed: [], predicted: [] });
    expect(host.querySelector("svg")).toBeNull();
    expect(host.querySelector(".chart-empty")).toBeTruthy();
  });
});

function whatIf(inside: boolean): WhatIfResponse {
  return {
    startTime: 0,
    endTime: 5,
    finalState: { x: 3, y: 0 },
    insideFence: inside,
    alert: inside ? null : "forecast exits the fence",
    trajectory: [
      { t: 0, x: 0, y: 0 },
      { t: 5, x: 3, y: 0 },
    ],
    fence: { center: [0, 0], radius: 2, xState: "x", yState: "y" },
  };
}

describe("what-if plane", () => {
  it("draws the fence circle, the forecast path, and the endpoint", () => {
    renderPlane(host, whatIf(true));
    expect(host.querySelector("circle.fence")).toBeTruthy();
    expect(host.querySelector("polyline.forecast-path")).toBeTruthy();
    const endpoint = host.querySelector("circle.endpoint")!;
    expect(endpoint.classList.contains("outside")).toBe(false);
  });

  it("marks the endpoint when the forecast leaves the fence", () => {
    renderPlane(host, whatIf(false));
    const endpoint = host.querySelector("circle.endpoint")!;
    expect(endpoint.classList.contains("outside")).toBe(true);
  });

  it("renders a placeholder when no fence was requested", () => {
    const result = { ...whatIf(true), fence: undefined };
    renderPlane(host, result);
    expect(host.querySelector("svg")).toBeNull();
    expect(host.querySelector(".chart-empty")).toBeTruthy();
  });
});
