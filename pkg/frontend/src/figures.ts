/** Figure builders: pure functions from parsed harness outputs to SVG
 *  strings. Nothing here recomputes statistics; every plotted number comes
 *  from a file the harness wrote, and echoed values keep their exact
 *  on-disk strings in data- attributes so consumers can trace them back. */

import { colormap } from "./colormap.js";
import {
  AggregateRow,
  DensityGrid,
  HistogramRow,
  RunManifest,
  SweepRecord,
} from "./schema.js";
import {
  PHASE_TICKS,
  Scale,
  Tick,
  axes,
  decimalTicks,
  document,
  el,
  escapeXml,
  fmt,
  linearScale,
  log10Scale,
  polyline,
  text,
} from "./svg.js";

const SERIES_COLORS = ["#4c78a8", "#f58518", "#54a24b", "#b279a2", "#e45756"];

function etaLabel(eta: number): string {
  return eta >= 1 ? String(eta) : eta.toExponential();
}

function logEtaTicks(etas: number[]): Tick[] {
  return etas.map((e) => ({ value: e, label: etaLabel(e) }));
}

// --------------------------------------------------------------- heat map

/** Phase-density heat map with the record's maxima marked. */
export function fig2(
  density: DensityGrid,
  record: SweepRecord,
  points: number[][],
): string {
  const left = 70;
  const top = 46;
  const plot = 384;
  const cell = plot / density.n;
  const width = left + plot + 120;
  const height = top + plot + 70;

  let lo = Infinity;
  let hi = -Infinity;
  for (const line of density.values) {
    for (const v of line) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  const span = hi - lo || 1;

  const body: string[] = [];
  body.push(
    text(left + plot / 2, 20, "steady-state phase density", {
      "text-anchor": "middle",
      "font-size": 14,
    }),
  );
  body.push(
    text(
      left + plot / 2,
      36,
      `sample ${record.sampleId}, eta ${record.eta}, seed ${record.seed}`,
      { "text-anchor": "middle", "fill": "#555" },
    ),
  );

  const cells: string[] = [];
  for (let i = 0; i < density.n; i++) {
    for (let j = 0; j < density.n; j++) {
      const t = (density.values[i][j] - lo) / span;
      cells.push(
        el("rect", {
          x: fmt(left + i * cell),
          y: fmt(top + plot - (j + 1) * cell),
          width: fmt(cell),
          height: fmt(cell),
          fill: colormap(t),
        }),
      );
    }
  }
  body.push(el("g", { "shape-rendering": "crispEdges" }, cells.join("")));

  const xScale = linearScale([0, 2 * Math.PI], [left, left + plot]);
  const yScale = linearScale([0, 2 * Math.PI], [top + plot, top]);
  body.push(
    axes(xScale, yScale, PHASE_TICKS, PHASE_TICKS, {
      x: "phi1'",
      y: "phi2'",
    }),
  );

  const markers = points
    .map(([p1, p2]) =>
      el("circle", {
        cx: fmt(xScale(p1)),
        cy: fmt(yScale(p2)),
        r: 5,
        fill: "none",
        stroke: "white",
        "stroke-width": 2,
      }) +
      el("circle", {
        cx: fmt(xScale(p1)),
        cy: fmt(yScale(p2)),
        r: 7,
        fill: "none",
        stroke: "black",
        "stroke-width": 1,
      }),
    )
    .join("");
  body.push(
    el(
      "g",
      {
        id: "argmax-markers",
        "data-sample-id": record.sampleId,
        "data-eta": record.eta,
        "data-phi1p": record.argmaxPhi1p,
        "data-phi2p": record.argmaxPhi2p,
        "data-multiplicity": points.length,
      },
      markers,
    ),
  );

  // colorbar with the density extremes
  const barX = left + plot + 24;
  const barW = 16;
  const steps = 32;
  const bar: string[] = [];
  for (let k = 0; k < steps; k++) {
    bar.push(
      el("rect", {
        x: fmt(barX),
        y: fmt(top + plot - ((k + 1) * plot) / steps),
        width: fmt(barW),
        height: fmt(plot / steps),
        fill: colormap((k + 0.5) / steps),
      }),
    );
  }
  body.push(el("g", { "shape-rendering": "crispEdges" }, bar.join("")));
  body.push(
    polyline(
      [
        [barX, top],
        [barX + barW, top],
        [barX + barW, top + plot],
        [barX, top + plot],
        [barX, top],
      ],
      { stroke: "#333", "stroke-width": 1 },
    ),
  );
  body.push(text(barX + barW + 5, top + 10, hi.toExponential(3)));
  body.push(text(barX + barW + 5, top + plot, lo.toExponential(3)));

  return document(width, height, body.join("\n"));
}

// ------------------------------------------------------- histogram panel

function histogramPanel(
  x0: number,
  y0: number,
  w: number,
  h: number,
  series: Array<{ label: string; rows: HistogramRow[] }>,
  title: string,
  xLabel: string,
): string {
  const body: string[] = [];
  let top = 0;
  for (const s of series) {
    for (const r of s.rows) top = Math.max(top, r.density);
  }
  const xScale = linearScale([0, 1], [x0, x0 + w]);
  const yScale = linearScale([0, top * 1.05 || 1], [y0 + h, y0]);
  body.push(
    text(x0 + w / 2, y0 - 8, title, { "text-anchor": "middle", "font-size": 13 }),
  );
  series.forEach((s, k) => {
    const pts: Array<[number, number]> = [];
    for (const r of s.rows) {
      pts.push([xScale(r.left), yScale(r.density)]);
      pts.push([xScale(r.right), yScale(r.density)]);
    }
    body.push(
      polyline(pts, {
        stroke: SERIES_COLORS[k % SERIES_COLORS.length],
        "stroke-width": 1.5,
        "data-series": escapeXml(s.label),
      }),
    );
    const ly = y0 + 14 + 14 * k;
    body.push(
      polyline(
        [
          [x0 + w - 78, ly - 4],
          [x0 + w - 62, ly - 4],
        ],
        { stroke: SERIES_COLORS[k % SERIES_COLORS.length], "stroke-width": 2 },
      ),
    );
    body.push(text(x0 + w - 58, ly, s.label));
  });
  body.push(
    axes(xScale, yScale, decimalTicks(0, 1, 5), decimalTicks(0, top * 1.05 || 1, 4), {
      x: xLabel,
      y: "density",
    }),
  );
  return body.join("\n");
}

// ------------------------------------------------- curve panel plumbing

function errorBar(
  x: number,
  yLo: number,
  yHi: number,
  color: string,
): string {
  return (
    polyline(
      [
        [x, yLo],
        [x, yHi],
      ],
      { stroke: color, "stroke-width": 1 },
    ) +
    polyline(
      [
        [x - 3, yLo],
        [x + 3, yLo],
      ],
      { stroke: color, "stroke-width": 1 },
    ) +
    polyline(
      [
        [x - 3, yHi],
        [x + 3, yHi],
      ],
      { stroke: color, "stroke-width": 1 },
    )
  );
}

function seriesPoint(
  x: number,
  y: number,
  color: string,
  data: Record<string, string | number>,
): string {
  return el("circle", {
    cx: fmt(x),
    cy: fmt(y),
    r: 3,
    fill: color,
    ...data,
  });
}

// ----------------------------------------------------------- sweep panels

/** Chain-sweep summary: spread histograms, interval probabilities,
 *  family ratio, and mean peak height against perturbation strength. */
export function fig3(
  aggregate: AggregateRow[],
  histograms: Array<{ eta: number; rows: HistogramRow[] }>,
  manifest: RunManifest,
): string {
  const panelW = 300;
  const panelH = 220;
  const marginX = 64;
  const marginY = 56;
  const width = 2 * (panelW + marginX) + 76;
  const height = 2 * (panelH + marginY) + 60;
  const body: string[] = [];
  body.push(
    text(width / 2, 24, `sweep summary: ${manifest.label || "chain run"}`, {
      "text-anchor": "middle",
      "font-size": 15,
    }),
  );

  const ax = (cx: number, cy: number) => ({
    x0: marginX + cx * (panelW + marginX + 40),
    y0: 56 + cy * (panelH + marginY + 14),
  });

  // (a) pooled spread histograms per eta
  {
    const { x0, y0 } = ax(0, 0);
    body.push(
      histogramPanel(
        x0,
        y0,
        panelW,
        panelH,
        histograms.map((h) => ({ label: `eta = ${etaLabel(h.eta)}`, rows: h.rows })),
        "phase-spread distribution",
        manifest.chiKind === "chi2" ? "chi2" : "chi",
      ),
    );
  }

  const etas = aggregate.map((r) => Number(r.eta));
  const xScale = log10Scale(
    [Math.min(...etas), Math.max(...etas)],
    [0, panelW],
  );
  const xTicks = logEtaTicks(etas);

  // (b) interval probabilities vs eta
  {
    const { x0, y0 } = ax(1, 0);
    const shift = (s: Scale, dx: number): Scale => {
      const f = ((v: number) => s(v) + dx) as Scale;
      f.domain = s.domain;
      f.range = [s.range[0] + dx, s.range[1] + dx];
      return f;
    };
    const xs = shift(xScale, x0);
    let top = 0;
    for (const r of aggregate) {
      top = Math.max(top, ...r.p.map((p, i) => p + r.pSigma[i]));
    }
    const ys = linearScale([0, top * 1.1], [y0 + panelH, y0]);
    body.push(
      text(x0 + panelW / 2, y0 - 8, "interval probabilities", {
        "text-anchor": "middle",
        "font-size": 13,
      }),
    );
    for (let a = 0; a < 3; a++) {
      const color = SERIES_COLORS[a];
      const pts: Array<[number, number]> = aggregate.map((r) => [
        xs(Number(r.eta)),
        ys(r.p[a]),
      ]);
      body.push(polyline(pts, { stroke: color, "stroke-width": 1.5 }));
      aggregate.forEach((r) => {
        const x = xs(Number(r.eta));
        body.push(errorBar(x, ys(r.p[a] - r.pSigma[a]), ys(r.p[a] + r.pSigma[a]), color));
        body.push(
          seriesPoint(x, ys(r.p[a]), color, {
            "data-eta": r.eta,
            "data-interval": `p${a + 1}`,
            "data-value": r.raw[`p${a + 1}`],
          }),
        );
      });
      body.push(
        text(x0 + panelW - 58, y0 + 14 + 14 * a, `P${a + 1}`, { fill: color }),
      );
    }
    body.push(
      axes(xs, ys, xTicks, decimalTicks(0, top * 1.1, 4), {
        x: "perturbation strength",
        y: "probability",
      }),
    );
  }

  // (c) family ratio with bootstrap interval
  {
    const { x0, y0 } = ax(0, 1);
    const xls = ((v: number) => x0 + xScale(v)) as Scale;
    xls.domain = xScale.domain;
    xls.range = [x0, x0 + panelW];
    const defined = aggregate.filter((r) => Number.isFinite(r.ratio));
    let top = 1.3;
    for (const r of defined) top = Math.max(top, r.ratioCiHi * 1.05);
    const ys = linearScale([0, top], [y0 + panelH, y0]);
    body.push(
      text(x0 + panelW / 2, y0 - 8, "splayed-to-locked family ratio", {
        "text-anchor": "middle",
        "font-size": 13,
      }),
    );
    body.push(
      polyline(
        [
          [x0, ys(1)],
          [x0 + panelW, ys(1)],
        ],
        { stroke: "#999", "stroke-width": 1, "stroke-dasharray": "4 3" },
      ),
    );
    const pts: Array<[number, number]> = defined.map((r) => [
      xls(Number(r.eta)),
      ys(r.ratio),
    ]);
    body.push(polyline(pts, { stroke: SERIES_COLORS[0], "stroke-width": 1.5 }));
    defined.forEach((r) => {
      const x = xls(Number(r.eta));
      body.push(errorBar(x, ys(r.ratioCiLo), ys(r.ratioCiHi), SERIES_COLORS[0]));
      body.push(
        seriesPoint(x, ys(r.ratio), SERIES_COLORS[0], {
          "data-eta": r.eta,
          "data-ratio": r.raw["ratio"],
          "data-ci-lo": r.raw["ratio_ci_lo"],
          "data-ci-hi": r.raw["ratio_ci_hi"],
        }),
      );
    });
    body.push(
      axes(xls, ys, xTicks, decimalTicks(0, top, 4), {
        x: "perturbation strength",
        y: "P2 / (3 P1)",
      }),
    );
  }

  // (d) mean peak height vs eta
  {
    const { x0, y0 } = ax(1, 1);
    const xls = ((v: number) => x0 + xScale(v)) as Scale;
    xls.domain = xScale.domain;
    xls.range = [x0, x0 + panelW];
    const means = aggregate.map((r) => r.meanSMax);
    const lows = aggregate.map((r, i) => Math.max(means[i] - aggregate[i].semSMax, 0));
    const decadeLo = Math.floor(Math.log10(Math.min(...means) * 0.5));
    const decadeHi = Math.ceil(Math.log10(Math.max(...means) * 2));
    const ys = log10Scale(
      [Math.pow(10, decadeLo), Math.pow(10, decadeHi)],
      [y0 + panelH, y0],
    );
    const yTicks: Tick[] = [];
    for (let d = decadeLo; d <= decadeHi; d++) {
      yTicks.push({ value: Math.pow(10, d), label: `1e${d}` });
    }
    body.push(
      text(x0 + panelW / 2, y0 - 8, "mean peak height", {
        "text-anchor": "middle",
        "font-size": 13,
      }),
    );
    const pts: Array<[number, number]> = aggregate.map((r) => [
      xls(Number(r.eta)),
      ys(r.meanSMax),
    ]);
    body.push(polyline(pts, { stroke: SERIES_COLORS[1], "stroke-width": 1.5 }));
    aggregate.forEach((r, i) => {
      const x = xls(Number(r.eta));
      const lo = lows[i] > 0 ? lows[i] : Math.pow(10, decadeLo);
      body.push(errorBar(x, ys(lo), ys(r.meanSMax + r.semSMax), SERIES_COLORS[1]));
      body.push(
        seriesPoint(x, ys(r.meanSMax), SERIES_COLORS[1], {
          "data-eta": r.eta,
          "data-value": r.raw["mean_s_max"],
          "data-sem": r.raw["sem_s_max"],
        }),
      );
    });
    body.push(
      axes(xls, ys, xTicks, yTicks, {
        x: "perturbation strength",
        y: "mean S_max",
      }),
    );
  }

  return document(width, height, body.join("\n"));
}

/** Pair-sweep summary: two-site spread histograms and the per-record
 *  peak-height strip with ensemble means. */
export function fig4(
  aggregate: AggregateRow[],
  histograms: Array<{ eta: number; rows: HistogramRow[] }>,
  records: SweepRecord[],
  manifest: RunManifest,
): string {
  const panelW = 320;
  const panelH = 240;
  const marginX = 66;
  const width = 2 * (panelW + marginX) + 60;
  const height = panelH + 130;
  const body: string[] = [];
  body.push(
    text(width / 2, 24, `sweep summary: ${manifest.label || "pair run"}`, {
      "text-anchor": "middle",
      "font-size": 15,
    }),
  );
  const y0 = 64;

  body.push(
    histogramPanel(
      marginX,
      y0,
      panelW,
      panelH,
      histograms.map((h) => ({ label: `eta = ${etaLabel(h.eta)}`, rows: h.rows })),
      "phase-spread distribution",
      manifest.chiKind === "chi" ? "chi" : "chi2",
    ),
  );

  // per-record peak heights by eta column, with the aggregate mean bar
  {
    const x0 = panelW + 2 * marginX + 40;
    const etas = aggregate.map((r) => r.eta);
    const xs = linearScale([-0.5, etas.length - 0.5], [x0, x0 + panelW]);
    const ok = records.filter((r) => r.sMax !== null && r.sMax > 0);
    let lo = Infinity;
    let hi = -Infinity;
    for (const r of ok) {
      lo = Math.min(lo, r.sMax as number);
      hi = Math.max(hi, r.sMax as number);
    }
    for (const a of aggregate) {
      if (a.meanSMax > 0) {
        lo = Math.min(lo, a.meanSMax);
        hi = Math.max(hi, a.meanSMax);
      }
    }
    const decadeLo = Math.floor(Math.log10(lo));
    const decadeHi = Math.ceil(Math.log10(hi));
    const ys = log10Scale(
      [Math.pow(10, decadeLo), Math.pow(10, decadeHi)],
      [y0 + panelH, y0],
    );
    const yTicks: Tick[] = [];
    for (let d = decadeLo; d <= decadeHi; d++) {
      yTicks.push({ value: Math.pow(10, d), label: `1e${d}` });
    }
    body.push(
      text(x0 + panelW / 2, y0 - 8, "peak height by record", {
        "text-anchor": "middle",
        "font-size": 13,
      }),
    );
    etas.forEach((etaStr, col) => {
      const colRecords = ok.filter((r) => r.eta === etaStr);
      for (const r of colRecords) {
        // deterministic horizontal spread keyed by the sample id
        const off = (((r.sampleId * 37) % 64) / 64 - 0.5) * 0.7;
        body.push(
          el("circle", {
            cx: fmt(xs(col + off)),
            cy: fmt(ys(r.sMax as number)),
            r: 2,
            fill: SERIES_COLORS[col % SERIES_COLORS.length],
            "fill-opacity": 0.5,
            "data-sample-id": r.sampleId,
            "data-eta": r.eta,
            "data-s-max": r.sMaxRaw,
          }),
        );
      }
      const agg = aggregate[col];
      if (agg.meanSMax > 0) {
        body.push(
          polyline(
            [
              [xs(col - 0.35), ys(agg.meanSMax)],
              [xs(col + 0.35), ys(agg.meanSMax)],
            ],
            {
              stroke: "#222",
              "stroke-width": 2,
              "data-eta": agg.eta,
              "data-mean": agg.raw["mean_s_max"],
            },
          ),
        );
      }
    });
    const xTicks: Tick[] = etas.map((e, i) => ({
      value: i,
      label: `eta = ${etaLabel(Number(e))}`,
    }));
    body.push(
      axes(xs, ys, xTicks, yTicks, { x: "", y: "S_max" }),
    );
  }

  return document(width, height, body.join("\n"));
}
