/**
 * CSV contracts for the two figure sets.
 *
 * The columns here mirror the harness writers; a mismatch is a user-facing
 * error, not a bug, so every failure names the offending column or policy.
 */

import Papa from "papaparse";

export class SchemaError extends Error {}

export interface FigsetSpec {
  /** File expected inside the --in directory. */
  file: string;
  xColumn: string;
  xLabel: string;
  metrics: { column: string; title: string }[];
}

export const FIGSETS: Record<"qi" | "fleet", FigsetSpec> = {
  qi: {
    file: "summary.csv",
    xColumn: "qi",
    xLabel: "Query interval",
    metrics: [
      { column: "mean_n_scheduled", title: "Scheduled sensors" },
      { column: "mean_total_power_w", title: "Total transmit power (W)" },
      { column: "violation_prob", title: "Violation probability" },
      { column: "rmse", title: "RMSE" },
    ],
  },
  fleet: {
    file: "fleet_summary.csv",
    xColumn: "fleet_size",
    xLabel: "Fleet size",
    metrics: [
      { column: "mean_n_scheduled", title: "Scheduled sensors" },
      { column: "mean_total_power_w", title: "Total transmit power (W)" },
      { column: "violation_prob", title: "Violation probability" },
      { column: "mrmse", title: "MRMSE" },
    ],
  },
};

export interface Row {
  policy: string;
  x: number;
  values: Record<string, number>;
}

function toNumber(raw: string, column: string, line: number): number {
  const v = Number(raw);
  if (raw === "" || raw === undefined || !Number.isFinite(v)) {
    throw new SchemaError(
      `column "${column}" has non-numeric value ${JSON.stringify(raw)} on data row ${line}`
    );
  }
  return v;
}

/** Parse and validate one CSV against a figset spec. */
export function parseRows(text: string, spec: FigsetSpec): Row[] {
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const col of ["policy", spec.xColumn, ...spec.metrics.map((m) => m.column)]) {
    if (!fields.includes(col)) {
      throw new SchemaError(`${spec.file}: missing column "${col}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${spec.file}: no data rows`);
  }
  return parsed.data.map((rec, i) => {
    const values: Record<string, number> = {};
    for (const m of spec.metrics) {
      values[m.column] = toNumber(rec[m.column], m.column, i + 1);
    }
    return {
      policy: rec.policy,
      x: toNumber(rec[spec.xColumn], spec.xColumn, i + 1),
      values,
    };
  });
}

/**
 * Policies to plot: the requested list, or every policy in the file in
 * first-appearance order. Requesting a policy the file lacks is an error.
 */
export function selectPolicies(rows: Row[], requested?: string[]): string[] {
  const present: string[] = [];
  for (const row of rows) {
    if (!present.includes(row.policy)) present.push(row.policy);
  }
  if (!requested || requested.length === 0) return present;
  for (const p of requested) {
    if (!present.includes(p)) {
      throw new SchemaError(`missing policy "${p}" (file has: ${present.join(", ")})`);
    }
  }
  return requested;
}

export interface Series {
  policy: string;
  x: number[];
  y: number[];
}

/** Per-policy line for one metric, sorted by x. */
export function seriesFor(rows: Row[], policies: string[], column: string): Series[] {
  return policies.map((policy) => {
    const mine = rows
      .filter((r) => r.policy === policy)
      .sort((a, b) => a.x - b.x);
    return {
      policy,
      x: mine.map((r) => r.x),
      y: mine.map((r) => r.values[column]),
    };
  });
}
