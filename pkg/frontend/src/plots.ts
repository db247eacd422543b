/** The three figure products: curriculum statistics, return/success curves,
 * and the curricula-variance table. */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { parseVarianceCsv } from "./csv.js";
import { RunSeries, aggregate, curriculumStatistics, loadSweepDir } from "./series.js";
import { renderChart } from "./svg.js";

export type Format = "svg" | "png";

function writeChart(
  outDir: string,
  stem: string,
  format: Format,
  svg: string
): string {
  if (format === "png") {
    throw new Error(
      "png output needs an external rasterizer (e.g. rsvg-convert on the " +
        "generated svg); use --format svg"
    );
  }
  mkdirSync(outDir, { recursive: true });
  const path = join(outDir, `${stem}.${format}`);
  writeFileSync(path, svg);
  return path;
}

function chartFor(
  runs: RunSeries[],
  name: string,
  value: (r: import("./csv.js").RunRecord) => number
): string {
  return renderChart(
    name,
    "curriculum update",
    name,
    runs.map((series) => ({ label: series.method, band: aggregate(series, value) }))
  );
}

/** One chart per curriculum statistic (per-dimension mean and variance). */
export function plotCurriculum(inDir: string, outDir: string, format: Format): string[] {
  const runs = loadSweepDir(inDir);
  const dim = [...runs[0].seeds.values()][0][0].mu.length;
  return curriculumStatistics(dim).map(({ name, value }) =>
    writeChart(outDir, `curriculum_${name}`, format, chartFor(runs, name, value))
  );
}

/** Expected-return and success-ratio progressions. */
export function plotReturns(inDir: string, outDir: string, format: Format): string[] {
  const runs = loadSweepDir(inDir);
  return [
    writeChart(
      outDir,
      "returns_eval_return",
      format,
      chartFor(runs, "eval_return", (r) => r.evalReturn)
    ),
    writeChart(
      outDir,
      "returns_success_ratio",
      format,
      chartFor(runs, "success_ratio", (r) => r.successRatio)
    ),
  ];
}

/** Markdown table of seed-averaged curricula variances, three significant
 * digits in scientific notation, one column per method. */
export function renderVarianceTable(reportCsv: string, outDir: string): string {
  const rows = parseVarianceCsv(readFileSync(reportCsv, "utf8"), reportCsv);
  const methods = [...new Set(rows.map((r) => r.method))].sort();
  const statistics = [...new Set(rows.map((r) => r.statistic))];
  const lines: string[] = [];
  lines.push(["statistic", ...methods].join(" | "));
  lines.push(["---", ...methods.map(() => "---")].join(" | "));
  for (const stat of statistics) {
    const cells = methods.map((method) => {
      const values = rows
        .filter((r) => r.method === method && r.statistic === stat)
        .map((r) => r.variance);
      if (values.length === 0) return "-";
      const mean = values.reduce((a, b) => a + b, 0) / values.length;
      return mean.toExponential(2);
    });
    lines.push([stat, ...cells].join(" | "));
  }
  const text = lines.map((line) => `| ${line} |`).join("\n") + "\n";
  mkdirSync(outDir, { recursive: true });
  const path = join(outDir, "variance_table.md");
  writeFileSync(path, text);
  return path;
}
