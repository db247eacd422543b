/** Synthetic sweep fixtures matching the harness CSV schema. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

export const RUN_HEADER =
  "iter,mu_1,mu_2,var_1,var_2,alpha,batch_return,eval_return," +
  "success_ratio,kl_to_target,kl_step,solver_status";

export function runCsv(rows: number[][], status = "ok"): string {
  const lines = [RUN_HEADER];
  for (const row of rows) {
    lines.push([...row.map((x) => String(x)), status].join(","));
  }
  return lines.join("\n") + "\n";
}

/** A smooth synthetic run: mu walks toward (2, 2), success ramps up. */
export function syntheticRun(seed: number, iterations = 10): string {
  const rows: number[][] = [];
  for (let k = 1; k <= iterations; k++) {
    const t = k / iterations;
    const wobble = 0.05 * Math.sin(seed + k);
    rows.push([
      k,
      2 * t + wobble,
      2 * t - wobble,
      0.25,
      0.25,
      t > 0.3 ? 1.5 : 0,
      3 * t,
      4 * t,
      Math.min(1, 1.2 * t),
      4 * (1 - t),
      0.2,
    ]);
  }
  return runCsv(rows);
}

export function writeSweepFixture(dir: string, methods = ["intermediate", "rm_guided"]): void {
  for (const method of methods) {
    const methodDir = join(dir, method);
    mkdirSync(methodDir, { recursive: true });
    for (const seed of [0, 1, 2]) {
      writeFileSync(join(methodDir, `seed_${seed}.csv`), syntheticRun(seed));
    }
  }
  const reportDir = join(dir, "report");
  mkdirSync(reportDir, { recursive: true });
  const rows = ["method,seed,statistic,variance"];
  for (const method of methods) {
    for (const seed of [0, 1, 2]) {
      for (const stat of ["mu_1", "mu_2", "var_1", "var_2"]) {
        const value = (method === "rm_guided" ? 0.001 : 0.2) * (1 + seed * 0.1);
        rows.push(`${method},${seed},${stat},${value}`);
      }
    }
  }
  writeFileSync(join(reportDir, "curricula_variance.csv"), rows.join("\n") + "\n");
}
