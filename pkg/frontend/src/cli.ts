#!/usr/bin/env node
import * as fs from "fs";
import * as path from "path";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { buildPanels, renderFigure } from "./figure";
import { FIGSETS, SchemaError, parseRows, selectPolicies } from "./schema";

export function run(argvRaw: string[]): number {
  const argv = yargs(argvRaw)
    .scriptName("plots")
    .option("in", {
      type: "string",
      demandOption: true,
      describe: "directory holding the CSV artifacts",
    })
    .option("figset", {
      choices: ["qi", "fleet"] as const,
      demandOption: true,
      describe: "qi: per-QI curves from summary.csv; fleet: fleet_summary.csv",
    })
    .option("out", { type: "string", demandOption: true })
    .option("policies", {
      type: "string",
      describe: "comma-separated subset; default: every policy in the file",
    })
    .strict()
    .exitProcess(false)
    .parseSync();

  const spec = FIGSETS[argv.figset];
  const csvPath = path.join(argv.in, spec.file);
  let text: string;
  try {
    text = fs.readFileSync(csvPath, "utf8");
  } catch {
    process.stderr.write(`schema error: cannot read ${csvPath}\n`);
    return 2;
  }
  try {
    const rows = parseRows(text, spec);
    const policies = selectPolicies(
      rows,
      argv.policies ? argv.policies.split(",").map((s) => s.trim()).filter(Boolean) : undefined
    );
    const svg = renderFigure(buildPanels(rows, policies, spec), spec.xLabel);
    fs.mkdirSync(argv.out, { recursive: true });
    const outPath = path.join(argv.out, `${argv.figset}.svg`);
    fs.writeFileSync(outPath, svg);
    process.stdout.write(`wrote ${outPath}\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
}

if (require.main === module) {
  try {
    process.exit(run(hideBin(process.argv)));
  } catch (err) {
    // yargs validation errors land here; print the message, not a trace.
    process.stderr.write(`${err instanceof Error ? err.message : err}\n`);
    process.exit(1);
  }
}
