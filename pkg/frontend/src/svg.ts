/** Deterministic SVG assembly: pure string building, fixed decimal
 *  formatting, no timestamps, no randomness. Rerendering the same inputs
 *  yields identical bytes. */

export function fmt(x: number): string {
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  const f = ((x: number) =>
    span === 0 ? (r0 + r1) / 2 : r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export function log10Scale(domain: [number, number], range: [number, number]): Scale {
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const f = ((x: number) => inner(Math.log10(x))) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export interface Tick {
  value: number;
  label: string;
}

export const PHASE_TICKS: Tick[] = [
  { value: 0, label: "0" },
  { value: Math.PI / 2, label: "π/2" },
  { value: Math.PI, label: "π" },
  { value: (3 * Math.PI) / 2, label: "3π/2" },
  { value: 2 * Math.PI, label: "2π" },
];

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  children?: string,
): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${v}"`)
    .join(" ");
  if (children === undefined) return `<${tag} ${parts}/>`;
  return `<${tag} ${parts}>${children}</${tag}>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  extra: Record<string, string | number> = {},
): string {
  return el(
    "text",
    { x: fmt(x), y: fmt(y), "font-family": "sans-serif", "font-size": 11, ...extra },
    escapeXml(content),
  );
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function polyline(
  points: Array<[number, number]>,
  attrs: Record<string, string | number>,
): string {
  const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polyline", { points: coords, fill: "none", ...attrs });
}

/** x axis along the bottom edge plus a y axis on the left, with tick labels */
export function axes(
  xScale: Scale,
  yScale: Scale,
  xTicks: Tick[],
  yTicks: Tick[],
  labels: { x: string; y: string },
): string {
  const [x0, x1] = xScale.range;
  const [y0, y1] = yScale.range; // y0 = bottom pixel, y1 = top pixel
  const out: string[] = [];
  out.push(
    polyline(
      [
        [x0, y1],
        [x0, y0],
        [x1, y0],
      ],
      { stroke: "#333", "stroke-width": 1 },
    ),
  );
  for (const t of xTicks) {
    const px = xScale(t.value);
    out.push(polyline([[px, y0], [px, y0 + 4]], { stroke: "#333", "stroke-width": 1 }));
    out.push(text(px, y0 + 16, t.label, { "text-anchor": "middle" }));
  }
  for (const t of yTicks) {
    const py = yScale(t.value);
    out.push(polyline([[x0 - 4, py], [x0, py]], { stroke: "#333", "stroke-width": 1 }));
    out.push(text(x0 - 7, py + 4, t.label, { "text-anchor": "end" }));
  }
  const midX = (x0 + x1) / 2;
  const midY = (y0 + y1) / 2;
  out.push(text(midX, y0 + 32, labels.x, { "text-anchor": "middle", "font-size": 12 }));
  out.push(
    el(
      "text",
      {
        x: fmt(x0 - 34),
        y: fmt(midY),
        "font-family": "sans-serif",
        "font-size": 12,
        "text-anchor": "middle",
        transform: `rotate(-90 ${fmt(x0 - 34)} ${fmt(midY)})`,
      },
      escapeXml(labels.y),
    ),
  );
  return out.join("\n");
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">\n` +
    `<rect x="0" y="0" width="${width}" height="${height}" fill="white"/>\n` +
    body +
    "\n</svg>\n"
  );
}

/** ticks at 'nice' decimal steps covering [lo, hi] */
export function decimalTicks(lo: number, hi: number, target = 5): Tick[] {
  if (hi <= lo) return [{ value: lo, label: trimmed(lo) }];
  const rawStep = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const k of [1, 2, 5, 10]) {
    if (mag * k >= rawStep) {
      step = mag * k;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const ticks: Tick[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    const snapped = Math.round(v / step) * step;
    ticks.push({ value: snapped, label: trimmed(snapped) });
  }
  return ticks;
}

function trimmed(v: number): string {
  if (v === 0) return "0";
  if (Math.abs(v) >= 0.01 && Math.abs(v) < 10000) {
    return String(parseFloat(v.toPrecision(6)));
  }
  return v.toExponential(1).replace("e-", "e-").replace("e+", "e");
}
