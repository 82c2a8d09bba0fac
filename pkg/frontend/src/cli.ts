#!/usr/bin/env node
/**
 * ksplot: batch SVG reports from simulator CSV artifacts.
 *
 *   ksplot series <series.csv> --out <dir> [--phi-threshold X] [--c0 X]
 *   ksplot sweep  <sweep.csv>  --out <dir>
 *
 * Exit codes: 0 success, 1 usage/schema error, 3 I/O error.
 */

import { mkdirSync, readFileSync, writeFileSync } from "fs";
import { join } from "path";

import { renderSeriesPlots, renderSweep } from "./plots.js";
import { EmptyInputError, SchemaError, parseSeries, parseSweep } from "./series.js";

interface Args {
  verb: string;
  input: string;
  out: string;
  phiThreshold?: number;
  c0?: number;
}

function usage(): never {
  process.stderr.write(
    "usage: ksplot series <csv> --out <dir> [--phi-threshold X] [--c0 X]\n" +
    "       ksplot sweep <csv> --out <dir>\n",
  );
  process.exit(1);
}

function parseArgs(argv: string[]): Args {
  if (argv.length < 2) usage();
  const [verb, input, ...rest] = argv;
  if (verb !== "series" && verb !== "sweep") usage();
  const args: Args = { verb, input, out: "." };
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) usage();
    if (flag === "--out") args.out = value;
    else if (flag === "--phi-threshold") args.phiThreshold = Number(value);
    else if (flag === "--c0") args.c0 = Number(value);
    else usage();
  }
  return args;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch {
    return 1;
  }
  let text: string;
  try {
    text = readFileSync(args.input, "utf8");
  } catch (err) {
    process.stderr.write(`i/o error: ${(err as Error).message}\n`);
    return 3;
  }
  try {
    mkdirSync(args.out, { recursive: true });
    if (args.verb === "series") {
      const table = parseSeries(text, args.input);
      const files = renderSeriesPlots(table, {
        phiThreshold: args.phiThreshold,
        c0: args.c0,
      });
      for (const [name, svg] of Object.entries(files)) {
        writeFileSync(join(args.out, name), svg);
        process.stdout.write(`wrote ${join(args.out, name)}\n`);
      }
    } else {
      const rows = parseSweep(text, args.input);
      const svg = renderSweep(rows);
      writeFileSync(join(args.out, "sweep.svg"), svg);
      process.stdout.write(`wrote ${join(args.out, "sweep.svg")}\n`);
    }
  } catch (err) {
    if (err instanceof SchemaError || err instanceof EmptyInputError) {
      process.stderr.write(`${err.name}: ${err.message}\n`);
      return 1;
    }
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
  return 0;
}

const isDirect = process.argv[1] && process.argv[1].endsWith("cli.js");
if (isDirect) {
  process.exit(main(process.argv.slice(2)));
}
