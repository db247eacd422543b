#!/usr/bin/env node
/**
 * rmsprl-plot: render figures from a sweep directory.
 *
 *   rmsprl-plot curriculum --in <sweep dir> --out <dir> [--format svg|png]
 *   rmsprl-plot returns    --in <sweep dir> --out <dir> [--format svg|png]
 *   rmsprl-plot table      --in <sweep dir> --out <dir>
 *
 * `table` reads <sweep dir>/report/curricula_variance.csv (produced by
 * `rmsprl report`); a direct path to that CSV is also accepted.
 */

import { existsSync, statSync } from "node:fs";
import { join } from "node:path";

import { Format, plotCurriculum, plotReturns, renderVarianceTable } from "./plots.js";

interface Args {
  command: string;
  inPath: string;
  outDir: string;
  format: Format;
}

export function parseArgs(argv: string[]): Args {
  const [command, ...rest] = argv;
  if (!["curriculum", "returns", "table"].includes(command ?? "")) {
    throw new Error("usage: rmsprl-plot curriculum|returns|table --in <dir> --out <dir> [--format svg|png]");
  }
  let inPath = "";
  let outDir = "";
  let format: Format = "svg";
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) throw new Error(`missing value for ${flag}`);
    if (flag === "--in") inPath = value;
    else if (flag === "--out") outDir = value;
    else if (flag === "--format") {
      if (value !== "svg" && value !== "png") {
        throw new Error(`unknown format ${value}; expected svg or png`);
      }
      format = value;
    } else throw new Error(`unknown flag ${flag}`);
  }
  if (!inPath || !outDir) throw new Error("--in and --out are required");
  return { command, inPath, outDir, format };
}

export function run(argv: string[]): string[] {
  const args = parseArgs(argv);
  if (args.command === "curriculum") {
    return plotCurriculum(args.inPath, args.outDir, args.format);
  }
  if (args.command === "returns") {
    return plotReturns(args.inPath, args.outDir, args.format);
  }
  let reportCsv = args.inPath;
  if (existsSync(reportCsv) && statSync(reportCsv).isDirectory()) {
    reportCsv = join(args.inPath, "report", "curricula_variance.csv");
  }
  if (!existsSync(reportCsv)) {
    throw new Error(`${reportCsv} not found; run \`rmsprl report\` on the sweep first`);
  }
  return [renderVarianceTable(reportCsv, args.outDir)];
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;

if (invokedDirectly) {
  try {
    for (const path of run(process.argv.slice(2))) {
      console.log(`wrote ${path}`);
    }
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }
}
