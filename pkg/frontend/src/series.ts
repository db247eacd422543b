/** Loading sweep directories and aggregating per-seed series. */

import { readdirSync, readFileSync, statSync } from "node:fs";
import { join } from "node:path";

import { RunRecord, parseRunCsv } from "./csv.js";

export interface RunSeries {
  method: string;
  seeds: Map<number, RunRecord[]>;
}

/** Load `<dir>/<method>/seed_*.csv` into one series per method. */
export function loadSweepDir(dir: string): RunSeries[] {
  const out: RunSeries[] = [];
  const entries = readdirSync(dir).sort();
  for (const entry of entries) {
    const methodDir = join(dir, entry);
    if (entry === "report" || !statSync(methodDir).isDirectory()) continue;
    const seeds = new Map<number, RunRecord[]>();
    for (const file of readdirSync(methodDir).sort()) {
      const match = /^seed_(\d+)\.csv$/.exec(file);
      if (!match) continue;
      const records = parseRunCsv(
        readFileSync(join(methodDir, file), "utf8"),
        `${entry}/${file}`
      );
      seeds.set(Number(match[1]), records);
    }
    if (seeds.size > 0) {
      const dims = new Set(
        [...seeds.values()].map((records) => records[0]?.mu.length ?? 0)
      );
      if (dims.size > 1) {
        throw new Error(`${entry}: seeds disagree on context dimension`);
      }
      out.push({ method: entry, seeds });
    }
  }
  if (out.length === 0) throw new Error(`no run CSVs found under ${dir}`);
  return out;
}

/** Linear-interpolation quantile of a sorted copy of the values. */
export function quantile(values: number[], q: number): number {
  if (values.length === 0) throw new Error("quantile of empty list");
  const sorted = [...values].sort((a, b) => a - b);
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

export interface BandSeries {
  iters: number[];
  median: number[];
  q1: number[];
  q3: number[];
}

/**
 * Median and quartiles across seeds, per iteration.  Iterations present in
 * only some seeds (shorter runs) aggregate over the seeds that have them.
 */
export function aggregate(
  series: RunSeries,
  value: (r: RunRecord) => number
): BandSeries {
  const byIter = new Map<number, number[]>();
  for (const records of series.seeds.values()) {
    for (const r of records) {
      const bucket = byIter.get(r.iter) ?? [];
      bucket.push(value(r));
      byIter.set(r.iter, bucket);
    }
  }
  const iters = [...byIter.keys()].sort((a, b) => a - b);
  return {
    iters,
    median: iters.map((i) => quantile(byIter.get(i)!, 0.5)),
    q1: iters.map((i) => quantile(byIter.get(i)!, 0.25)),
    q3: iters.map((i) => quantile(byIter.get(i)!, 0.75)),
  };
}

/** The per-statistic accessors of a sweep with `dim` context dimensions. */
export function curriculumStatistics(
  dim: number
): { name: string; value: (r: RunRecord) => number }[] {
  const out: { name: string; value: (r: RunRecord) => number }[] = [];
  for (let i = 0; i < dim; i++) {
    out.push({ name: `mu_${i + 1}`, value: (r) => r.mu[i] });
  }
  for (let i = 0; i < dim; i++) {
    out.push({ name: `var_${i + 1}`, value: (r) => r.vars[i] });
  }
  return out;
}
