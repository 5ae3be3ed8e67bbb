import { readFileSync, existsSync } from "node:fs";
import { join } from "node:path";
import { readCsv, requireColumns, columnIndex, SchemaError, Table } from "./csv.js";

export interface SweepRecord {
  sampleId: number;
  eta: string; // exact key string as written by the harness
  seed: string;
  sMax: number | null;
  sMaxRaw: string;
  multiplicity: number;
  reasonCode: string;
  /** exact argmax field strings; empty when the record carries none */
  argmaxPhi1p: string;
  argmaxPhi2p: string;
}

export interface AggregateRow {
  eta: string;
  nRecords: number;
  meanSMax: number;
  semSMax: number;
  p: [number, number, number];
  pSigma: [number, number, number];
  ratio: number;
  ratioCiLo: number;
  ratioCiHi: number;
  /** exact cell strings by column name, for verbatim echo into markup */
  raw: Record<string, string>;
}

export interface HistogramRow {
  left: number;
  right: number;
  density: number;
}

export interface DensityGrid {
  n: number;
  /** values[i][j] = S at (phi1p = i * 2pi/n, phi2p = j * 2pi/n) */
  values: number[][];
  comment: string;
}

export interface RunManifest {
  chiKind: string;
  etas: number[];
  label: string;
}

const RECORD_COLUMNS = [
  "sample_id",
  "eta",
  "seed",
  "s_max",
  "multiplicity",
  "reason_code",
  "argmax_phi1p",
  "argmax_phi2p",
];

export function readRecords(runDir: string): SweepRecord[] {
  const file = join(runDir, "records.csv");
  const table = readCsv(file);
  requireColumns(table, RECORD_COLUMNS, file);
  const col = (name: string) => columnIndex(table, name, file);
  return table.rows.map((row) => ({
    sampleId: parseInt(row[col("sample_id")], 10),
    eta: row[col("eta")],
    seed: row[col("seed")],
    sMax: row[col("s_max")] === "" ? null : Number(row[col("s_max")]),
    sMaxRaw: row[col("s_max")],
    multiplicity: parseInt(row[col("multiplicity")], 10),
    reasonCode: row[col("reason_code")],
    argmaxPhi1p: row[col("argmax_phi1p")],
    argmaxPhi2p: row[col("argmax_phi2p")],
  }));
}

export function readAggregate(runDir: string): AggregateRow[] {
  const file = join(runDir, "aggregate.csv");
  const table = readCsv(file);
  requireColumns(
    table,
    ["eta", "n_records", "mean_s_max", "sem_s_max", "p1", "p2", "p3",
     "p1_sigma", "p2_sigma", "p3_sigma", "ratio", "ratio_ci_lo", "ratio_ci_hi"],
    file,
  );
  const col = (name: string) => columnIndex(table, name, file);
  return table.rows.map((row) => ({
    eta: row[col("eta")],
    nRecords: parseInt(row[col("n_records")], 10),
    meanSMax: Number(row[col("mean_s_max")]),
    semSMax: Number(row[col("sem_s_max")]),
    p: [Number(row[col("p1")]), Number(row[col("p2")]), Number(row[col("p3")])] as [
      number,
      number,
      number,
    ],
    pSigma: [
      Number(row[col("p1_sigma")]),
      Number(row[col("p2_sigma")]),
      Number(row[col("p3_sigma")]),
    ] as [number, number, number],
    ratio: Number(row[col("ratio")]),
    ratioCiLo: Number(row[col("ratio_ci_lo")]),
    ratioCiHi: Number(row[col("ratio_ci_hi")]),
    raw: Object.fromEntries(table.columns.map((c, k) => [c, row[k]])),
  }));
}

export function readHistogram(path: string): HistogramRow[] {
  const table = readCsv(path);
  requireColumns(table, ["bin_left", "bin_right", "density"], path);
  const col = (name: string) => columnIndex(table, name, path);
  return table.rows.map((row) => ({
    left: Number(row[col("bin_left")]),
    right: Number(row[col("bin_right")]),
    density: Number(row[col("density")]),
  }));
}

export function readManifest(runDir: string): RunManifest {
  const path = join(runDir, "run_manifest.json");
  if (!existsSync(path)) {
    throw new SchemaError(`${runDir} has no run_manifest.json; not a sweep output`);
  }
  const raw = JSON.parse(readFileSync(path, "utf8"));
  if (typeof raw.chi_kind !== "string" || !raw.config || !Array.isArray(raw.config.etas)) {
    throw new SchemaError(`${path}: unexpected manifest shape`);
  }
  return {
    chiKind: raw.chi_kind,
    etas: raw.config.etas.map((e: unknown) => Number(e)),
    label: String(raw.config.label ?? ""),
  };
}

/** Two-axis reduced phase density as written by `steady`/`phase-dist`. */
export function readDensityGrid(path: string): DensityGrid {
  const table = readCsv(path);
  requireColumns(table, ["phi1p", "phi2p", "value"], path);
  const c1 = columnIndex(table, "phi1p", path);
  const c2 = columnIndex(table, "phi2p", path);
  const cv = columnIndex(table, "value", path);
  const n = Math.round(Math.sqrt(table.rows.length));
  if (n * n !== table.rows.length) {
    throw new SchemaError(`${path}: ${table.rows.length} rows is not a square grid`);
  }
  const step = (2 * Math.PI) / n;
  const values: number[][] = Array.from({ length: n }, () => new Array(n).fill(NaN));
  for (const row of table.rows) {
    const i = Math.round(Number(row[c1]) / step);
    const j = Math.round(Number(row[c2]) / step);
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw new SchemaError(`${path}: grid point (${row[c1]}, ${row[c2]}) off-lattice`);
    }
    values[i][j] = Number(row[cv]);
  }
  for (const line of values) {
    if (line.some((v) => Number.isNaN(v))) {
      throw new SchemaError(`${path}: grid has missing cells`);
    }
  }
  return { n, values, comment: table.comments.join(" ") };
}

/** argmax points of one record, from the run's jsonl diagnostics */
export function readArgmaxPoints(
  runDir: string,
  sampleId: number,
  eta: string,
): number[][] {
  const path = join(runDir, "records.jsonl");
  const text = readFileSync(path, "utf8");
  for (const line of text.split("\n")) {
    if (line === "") continue;
    const obj = JSON.parse(line);
    if (obj.sample_id === sampleId && etaKey(obj.eta) === eta) {
      if (!Array.isArray(obj.argmax)) {
        throw new SchemaError(
          `${path}: record (${sampleId}, ${eta}) carries no argmax points ` +
          `(reason: ${obj.reason_code})`,
        );
      }
      return obj.argmax as number[][];
    }
  }
  throw new SchemaError(`${path}: no record with sample_id ${sampleId}, eta ${eta}`);
}

/** Match Python's repr for the float keys the harness writes. Both sides
 *  print the shortest round-tripping digits, but the fixed/scientific
 *  cutoffs differ (Python switches below 1e-4, JS below 1e-6) and Python
 *  pads exponents to two digits and writes integer floats with a
 *  trailing .0. */
export function etaKey(eta: number): string {
  if (eta === 0) return "0.0";
  const [mantissa, expPart] = eta.toExponential().split("e");
  const exp = parseInt(expPart, 10);
  if (exp < -4 || exp >= 16) {
    const sign = exp < 0 ? "-" : "+";
    return `${mantissa}e${sign}${String(Math.abs(exp)).padStart(2, "0")}`;
  }
  const s = String(eta);
  return Number.isInteger(eta) ? `${s}.0` : s;
}

export function findRecord(
  records: SweepRecord[],
  sampleId: number,
  eta: string,
): SweepRecord {
  const hit = records.find((r) => r.sampleId === sampleId && r.eta === eta);
  if (!hit) {
    throw new SchemaError(`no record with sample_id ${sampleId} and eta ${eta}`);
  }
  return hit;
}
