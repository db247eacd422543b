/**
 * Parsing of the harness CSV output.
 *
 * Run files (`<sweep>/<method>/seed_<n>.csv`) carry one row per curriculum
 * iteration:
 *
 *   iter,mu_1..mu_G,var_1..var_G,alpha,batch_return,eval_return,
 *   success_ratio,kl_to_target,kl_step,solver_status
 *
 * The report file (`<sweep>/report/curricula_variance.csv`) is long-form:
 *
 *   method,seed,statistic,variance
 */

export interface RunRecord {
  iter: number;
  mu: number[];
  vars: number[];
  alpha: number;
  batchReturn: number;
  evalReturn: number;
  successRatio: number;
  klToTarget: number;
  klStep: number;
  solverStatus: string;
}

export interface VarianceRow {
  method: string;
  seed: number;
  statistic: string;
  variance: number;
}

const FIXED_COLUMNS = [
  "alpha",
  "batch_return",
  "eval_return",
  "success_ratio",
  "kl_to_target",
  "kl_step",
  "solver_status",
];

function splitLines(text: string): string[] {
  return text.split("\n").filter((line) => line.length > 0);
}

function parseNumber(raw: string, where: string): number {
  const value = Number(raw);
  if (raw === "" || Number.isNaN(value)) {
    throw new Error(`${where}: not a number: ${JSON.stringify(raw)}`);
  }
  return value;
}

/** Parse one run CSV; throws with a clear message on any schema problem. */
export function parseRunCsv(text: string, name = "run csv"): RunRecord[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new Error(`${name}: empty file`);
  const header = lines[0].split(",");
  const muCols: number[] = [];
  const varCols: number[] = [];
  header.forEach((h, i) => {
    if (/^mu_\d+$/.test(h)) muCols.push(i);
    if (/^var_\d+$/.test(h)) varCols.push(i);
  });
  const col = new Map(header.map((h, i) => [h, i]));
  const missing = ["iter", ...FIXED_COLUMNS].filter((c) => !col.has(c));
  if (missing.length > 0 || muCols.length === 0 || varCols.length !== muCols.length) {
    throw new Error(
      `${name}: header does not match the run schema ` +
        `(missing: ${missing.join(", ") || "mu_*/var_* columns"})`
    );
  }
  const records: RunRecord[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new Error(`${name}: row has ${parts.length} fields, header has ${header.length}`);
    }
    const num = (c: string) => parseNumber(parts[col.get(c)!], name);
    records.push({
      iter: num("iter"),
      mu: muCols.map((i) => parseNumber(parts[i], name)),
      vars: varCols.map((i) => parseNumber(parts[i], name)),
      alpha: num("alpha"),
      batchReturn: num("batch_return"),
      evalReturn: num("eval_return"),
      successRatio: num("success_ratio"),
      klToTarget: num("kl_to_target"),
      klStep: num("kl_step"),
      solverStatus: parts[col.get("solver_status")!],
    });
  }
  return records;
}

/** Parse the long-form curricula-variance report CSV. */
export function parseVarianceCsv(text: string, name = "variance csv"): VarianceRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new Error(`${name}: empty file`);
  const expected = "method,seed,statistic,variance";
  if (lines[0] !== expected) {
    throw new Error(`${name}: expected header ${expected}, got ${lines[0]}`);
  }
  return lines.slice(1).map((line) => {
    const [method, seed, statistic, variance] = line.split(",");
    return {
      method,
      seed: parseNumber(seed, name),
      statistic,
      variance: parseNumber(variance, name),
    };
  });
}
