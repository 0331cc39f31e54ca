/** SVG chart rendering.
 *
 * Pixel coordinates are presentation-only affine transforms; every number a
 * chart *labels* (axis extremes, the spawn instant) is a value selected from
 * the service payload and shown verbatim via `bindValue`.
 */

import { bindValue } from "./format.js";
import type { ComparisonSeries, ChartPoint } from "./session.js";
import type { WhatIfResponse } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const WIDTH = 640;
const HEIGHT = 320;
const PAD = 42;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

interface Scale {
  x: (t: number) => number;
  y: (v: number) => number;
}

function makeScale(
  tMin: number,
  tMax: number,
  vMin: number,
  vMax: number,
): Scale {
  const tSpan = tMax > tMin ? tMax - tMin : 1;
  const vSpan = vMax > vMin ? vMax - vMin : 1;
  return {
    x: (t) => PAD + ((t - tMin) / tSpan) * (WIDTH - 2 * PAD),
    y: (v) => HEIGHT - PAD - ((v - vMin) / vSpan) * (HEIGHT - 2 * PAD),
  };
}

function polylinePoints(points: readonly ChartPoint[], scale: Scale): string {
  return points.map((p) => `${scale.x(p.t)},${scale.y(p.v)}`).join(" ");
}

function axisLabel(
  svg: SVGSVGElement,
  cls: string,
  x: number,
  y: number,
  value: number,
  anchor: string,
): void {
  const text = svgEl("text", {
    class: `tick ${cls}`,
    x: String(x),
    y: String(y),
    "text-anchor": anchor,
  });
  bindValue(text, value);
  svg.appendChild(text);
}

/** Observed samples dotted, twin prediction solid, vertical marker at the
 * spawn instant. An empty series pair renders a placeholder and nothing else. */
export function renderComparison(
  host: HTMLElement,
  series: ComparisonSeries | null,
): void {
  host.textContent = "";
  if (
    series === null ||
    (series.observed.length === 0 && series.predicted.length === 0)
  ) {
    const p = document.createElement("p");
    p.className = "chart-empty";
    p.textContent = "nothing to plot in this range";
    host.appendChild(p);
    return;
  }

  const all = [...series.observed, ...series.predicted];
  let tMin = all[0]!.t;
  let tMax = all[0]!.t;
  let vMin = all[0]!.v;
  let vMax = all[0]!.v;
  for (const p of all) {
    if (p.t < tMin) tMin = p.t;
    if (p.t > tMax) tMax = p.t;
    if (p.v < vMin) vMin = p.v;
    if (p.v > vMax) vMax = p.v;
  }
  const scale = makeScale(tMin, tMax, vMin, vMax);

  const svg = svgEl("svg", {
    class: "comparison-chart",
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    role: "img",
  });

  svg.appendChild(
    svgEl("rect", {
      class: "chart-frame",
      x: String(PAD),
      y: String(PAD),
      width: String(WIDTH - 2 * PAD),
      height: String(HEIGHT - 2 * PAD),
    }),
  );

  if (series.observed.length > 0) {
    svg.appendChild(
      svgEl("polyline", {
        class: "observed",
        points: polylinePoints(series.observed, scale),
        "stroke-dasharray": "2 5",
      }),
    );
  }
  if (series.predicted.length > 0) {
    svg.appendChild(
      svgEl("polyline", {
        class: "predicted",
        points: polylinePoints(series.predicted, scale),
      }),
    );
  }

  if (series.spawnTime >= tMin && series.spawnTime <= tMax) {
    const sx = scale.x(series.spawnTime);
    svg.appendChild(
      svgEl("line", {
        class: "spawn-marker",
        x1: String(sx),
        y1: String(PAD),
        x2: String(sx),
        y2: String(HEIGHT - PAD),
      }),
    );
    const label = svgEl("text", {
      class: "tick spawn-label",
      x: String(sx),
      y: String(PAD - 8),
      "text-anchor": "middle",
    });
    bindValue(label, series.spawnTime);
    svg.appendChild(label);
  }

  axisLabel(svg, "t-min", PAD, HEIGHT - PAD + 16, tMin, "start");
  axisLabel(svg, "t-max", WIDTH - PAD, HEIGHT - PAD + 16, tMax, "end");
  axisLabel(svg, "v-min", PAD - 6, HEIGHT - PAD, vMin, "end");
  axisLabel(svg, "v-max", PAD - 6, PAD + 6, vMax, "end");

  host.appendChild(svg);
}

/** Forecast path on the (xState, yState) plane with the fence circle and an
 * endpoint marker; the marker is classed `outside` when the fence is exited. */
export function renderPlane(
  host: HTMLElement,
  result: WhatIfResponse,
): void {
  host.textContent = "";
  const fence = result.fence;
  if (!fence) {
    const p = document.createElement("p");
    p.className = "chart-empty";
    p.textContent = "no fence given — nothing to draw on the plane";
    host.appendChild(p);
    return;
  }

  const xs: number[] = [];
  const ys: number[] = [];
  for (const rec of result.trajectory) {
    const x = rec[fence.xState];
    const y = rec[fence.yState];
    if (x === undefined || y === undefined) continue;
    xs.push(x);
    ys.push(y);
  }
  const [cx, cy] = fence.center;
  const r = fence.radius;
  const xMin = Math.min(cx - r, ...xs);
  const xMax = Math.max(cx + r, ...xs);
  const yMin = Math.min(cy - r, ...ys);
  const yMax = Math.max(cy + r, ...ys);
  const scale = makeScale(xMin, xMax, yMin, yMax);
  const pxPerUnit = (WIDTH - 2 * PAD) / (xMax > xMin ? xMax - xMin : 1);

  const svg = svgEl("svg", {
    class: "plane-chart",
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    role: "img",
  });

  svg.appendChild(
    svgEl("circle", {
      class: "fence",
      cx: String(scale.x(cx)),
      cy: String(scale.y(cy)),
      r: String(r * pxPerUnit),
    }),
  );

  if (xs.length > 0) {
    const pts = xs.map((x, i) => `${scale.x(x)},${scale.y(ys[i]!)}`).join(" ");
    svg.appendChild(svgEl("polyline", { class: "forecast-path", points: pts }));
    const endX = xs[xs.length - 1]!;
    const endY = ys[ys.length - 1]!;
    svg.appendChild(
      svgEl("circle", {
        class:
          result.insideFence === false ? "endpoint outside" : "endpoint",
        cx: String(scale.x(endX)),
        cy: String(scale.y(endY)),
        r: "5",
      }),
    );
  }

  host.appendChild(svg);
}
