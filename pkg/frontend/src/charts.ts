/** Client-side SVG rendering of ChartSpec data: line charts for vitals,
 * bars for adherence, dashed threshold rules, red rings on annotated
 * samples. */

import type { ChartSpec } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 420;
const HEIGHT = 180;
const PAD = 36;

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export function renderChart(spec: ChartSpec): HTMLElement {
  const figure = document.createElement("figure");
  figure.className = "chart";
  figure.dataset.chartId = spec.chart_id;

  const caption = document.createElement("figcaption");
  caption.textContent = spec.caption;

  if (spec.empty || spec.points.length === 0) {
    const note = document.createElement("p");
    note.className = "chart-empty";
    note.textContent = "No data to plot.";
    figure.append(note, caption);
    return figure;
  }

  const xs = spec.points.map((p) => p.x);
  const ys = spec.points
    .map((p) => p.y)
    .concat(spec.threshold_lines.map((t) => t.y));
  if (spec.topic === "adherence") {
    ys.push(0);
  }
  const xMin = Math.min(...xs);
  const xSpan = Math.max(...xs) - xMin || 1;
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  const pad = (yMax - yMin || 1) * 0.08;
  yMin -= pad;
  yMax += pad;
  const ySpan = yMax - yMin;

  const sx = (x: number) => PAD + ((x - xMin) / xSpan) * (WIDTH - 2 * PAD);
  const sy = (y: number) => HEIGHT - PAD - ((y - yMin) / ySpan) * (HEIGHT - 2 * PAD);

  const svg = svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
    role: "img",
  });

  for (const line of spec.threshold_lines) {
    svg.append(
      svgElement("line", {
        x1: PAD,
        x2: WIDTH - PAD,
        y1: sy(line.y),
        y2: sy(line.y),
        stroke: "#999",
        "stroke-dasharray": "4 3",
      }),
    );
    const label = svgElement("text", {
      x: WIDTH - PAD + 2,
      y: sy(line.y) + 3,
      "font-size": 9,
      fill: "#666",
    });
    label.textContent = line.label;
    svg.append(label);
  }

  if (spec.topic === "adherence") {
    const barWidth = Math.max(4, ((WIDTH - 2 * PAD) / spec.points.length) * 0.6);
    const baseY = sy(Math.max(0, yMin));
    for (const point of spec.points) {
      svg.append(
        svgElement("rect", {
          x: sx(point.x) - barWidth / 2,
          y: sy(point.y),
          width: barWidth,
          height: Math.max(0, baseY - sy(point.y)),
          fill: "#4a7fb5",
        }),
      );
    }
  } else {
    const coords = spec.points
      .map((p) => `${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`)
      .join(" ");
    svg.append(
      svgElement("polyline", {
        points: coords,
        fill: "none",
        stroke: "#2a5d8f",
        "stroke-width": 1.5,
      }),
    );
    for (const point of spec.points) {
      svg.append(
        svgElement("circle", {
          cx: sx(point.x),
          cy: sy(point.y),
          r: 2.2,
          fill: "#2a5d8f",
        }),
      );
    }
  }

  const annotated = new Set(spec.annotations.map((a) => a.x));
  for (const point of spec.points) {
    if (annotated.has(point.x)) {
      const ring = svgElement("circle", {
        cx: sx(point.x),
        cy: sy(point.y),
        r: 4.5,
        fill: "none",
        stroke: "#c62828",
        "stroke-width": 1.5,
        class: "annotation-marker",
      });
      const title = svgElement("title", {});
      title.textContent =
        spec.annotations.find((a) => a.x === point.x)?.text ?? "";
      ring.append(title);
      svg.append(ring);
    }
  }

  figure.append(svg, caption);
  return figure;
}
