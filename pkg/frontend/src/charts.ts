// Dependency-free SVG charts. Missing data is drawn as an explicit gap:
// a status band leaves a hatched cell and a line chart breaks its path -
// nothing is ever substituted with zero.

import type { SeriesPoint, StatusPoint } from "./api";
import { t } from "./strings";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  return node;
}

export function lineChart(points: SeriesPoint[], width = 640, height = 160): SVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart line-chart",
    role: "img",
  });
  if (points.length === 0) return svg;

  const values = points.map((p) => p.value);
  const times = points.map((p) => Date.parse(p.timestamp));
  const [lo, hi] = [Math.min(...values), Math.max(...values)];
  const [t0, t1] = [Math.min(...times), Math.max(...times)];
  const pad = 10;
  const x = (time: number) =>
    t1 === t0 ? width / 2 : pad + ((time - t0) / (t1 - t0)) * (width - 2 * pad);
  const y = (value: number) =>
    hi === lo ? height / 2 : height - pad - ((value - lo) / (hi - lo)) * (height - 2 * pad);

  if (points.length > 1) {
    const path = points.map((p, i) => `${i ? "L" : "M"}${x(times[i])},${y(p.value)}`).join(" ");
    svg.append(svgEl("path", { d: path, class: "series-path", fill: "none" }));
  }
  points.forEach((p, i) => {
    const dot = svgEl("circle", {
      cx: String(x(times[i])),
      cy: String(y(p.value)),
      r: "3",
      class: "series-point",
      "data-timestamp": p.timestamp,
      "data-value": String(p.value),
    });
    svg.append(dot);
  });
  return svg;
}

/** One cell per sampled instant; insufficient data renders as a hatched
 * gap cell carrying no value at all. */
export function statusBand(points: StatusPoint[], width = 640, height = 36): HTMLElement {
  const band = document.createElement("div");
  band.className = "status-band";
  band.setAttribute("role", "img");
  if (points.length === 0) return band;
  const svg = svgEl("svg", { viewBox: `0 0 ${width} ${height}`, class: "chart band-chart" });
  const cell = width / points.length;
  points.forEach((point, i) => {
    const attrs: Record<string, string> = {
      x: String(i * cell + 1),
      y: "1",
      width: String(Math.max(cell - 2, 1)),
      height: String(height - 2),
      "data-timestamp": point.timestamp,
      "data-status": point.status,
    };
    if (point.status === "insufficient_data") {
      attrs.class = "band-cell gap";
      attrs["aria-label"] = t("monitor.status.insufficient_data");
    } else {
      attrs.class = `band-cell status-${point.status}`;
    }
    svg.append(svgEl("rect", attrs));
  });
  band.append(svg);
  return band;
}
