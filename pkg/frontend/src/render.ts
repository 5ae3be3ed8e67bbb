#!/usr/bin/env node
/** Command-line renderer: reads harness output files, writes one SVG.
 *  The whole document is built in memory first, so a failing input never
 *  leaves a partial file behind. */

import { realpathSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";

import { fig2, fig3, fig4 } from "./figures.js";
import {
  etaKey,
  findRecord,
  readAggregate,
  readArgmaxPoints,
  readDensityGrid,
  readHistogram,
  readManifest,
  readRecords,
} from "./schema.js";

const USAGE = `usage:
  spinsync-render --figure fig2 --density sd.csv --run RUN_DIR \\
                  --sample-id N --eta ETA --out FILE.svg
  spinsync-render --figure fig3 --run RUN_DIR --out FILE.svg
  spinsync-render --figure fig4 --run RUN_DIR --out FILE.svg

fig2  phase-density heat map of one record, maxima marked
fig3  sweep summary: spread histograms, interval probabilities,
      family ratio, mean peak height
fig4  sweep summary: spread histograms and per-record peak heights

RUN_DIR must be a sweep output directory (contains run_manifest.json).`;

interface Args {
  figure: string;
  run?: string;
  density?: string;
  sampleId?: number;
  eta?: string;
  out?: string;
}

class UsageError extends Error {}

function parseArgs(argv: string[]): Args {
  const args: Partial<Args> = {};
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new UsageError(`flag ${flag} needs a value`);
    }
    switch (flag) {
      case "--figure":
        args.figure = value;
        break;
      case "--run":
        args.run = value;
        break;
      case "--density":
        args.density = value;
        break;
      case "--sample-id":
        args.sampleId = parseInt(value, 10);
        if (Number.isNaN(args.sampleId)) {
          throw new UsageError(`--sample-id expects an integer, got '${value}'`);
        }
        break;
      case "--eta": {
        const eta = Number(value);
        if (Number.isNaN(eta)) {
          throw new UsageError(`--eta expects a number, got '${value}'`);
        }
        args.eta = etaKey(eta);
        break;
      }
      case "--out":
        args.out = value;
        break;
      default:
        throw new UsageError(`unknown flag ${flag}\n${USAGE}`);
    }
    i++;
  }
  if (!args.figure) throw new UsageError(`--figure is required\n${USAGE}`);
  if (!args.out) throw new UsageError("--out is required");
  return args as Args;
}

function need<T>(value: T | undefined, flag: string, figure: string): T {
  if (value === undefined) {
    throw new UsageError(`${figure} needs ${flag}`);
  }
  return value;
}

function loadHistograms(runDir: string, etas: number[]) {
  return etas.map((eta, k) => ({
    eta,
    rows: readHistogram(join(runDir, `chi_hist_eta${k}.csv`)),
  }));
}

export function render(args: Args): string {
  switch (args.figure) {
    case "fig2": {
      const run = need(args.run, "--run", "fig2");
      const density = readDensityGrid(need(args.density, "--density", "fig2"));
      const sampleId = need(args.sampleId, "--sample-id", "fig2");
      const eta = need(args.eta, "--eta", "fig2");
      readManifest(run);
      const record = findRecord(readRecords(run), sampleId, eta);
      const points = readArgmaxPoints(run, sampleId, eta);
      return fig2(density, record, points);
    }
    case "fig3": {
      const run = need(args.run, "--run", "fig3");
      const manifest = readManifest(run);
      return fig3(readAggregate(run), loadHistograms(run, manifest.etas), manifest);
    }
    case "fig4": {
      const run = need(args.run, "--run", "fig4");
      const manifest = readManifest(run);
      return fig4(
        readAggregate(run),
        loadHistograms(run, manifest.etas),
        readRecords(run),
        manifest,
      );
    }
    default:
      throw new UsageError(
        `unknown figure '${args.figure}' (expected fig2, fig3, or fig4)`,
      );
  }
}

export function main(argv: string[]): number {
  if (argv.includes("--help") || argv.includes("-h")) {
    console.log(USAGE);
    return 0;
  }
  try {
    const args = parseArgs(argv);
    const svg = render(args);
    writeFileSync(args.out as string, svg);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
}

const invokedAs = process.argv[1]
  ? pathToFileURL(realpathSync(process.argv[1])).href
  : "";
if (import.meta.url === invokedAs) {
  process.exit(main(process.argv.slice(2)));
}
