/** Command line: `report cactus in.csv -o out.svg`, `report tables scores.csv families.csv -o out.md`. */

import { readFileSync, writeFileSync } from "fs";

import { buildSeries, renderCactus } from "./cactus.js";
import { SchemaError, parseCactus, parseFamily, parseScores } from "./csv.js";
import { renderTables } from "./tables.js";

const USAGE =
  "usage: report cactus <results.csv> -o <cactus.svg>\n" +
  "       report tables <scores.csv> <families.csv> -o <report.md>";

function fail(message: string, code: number): number {
  process.stderr.write(`error: ${message}\n`);
  return code;
}

function splitArgs(argv: string[]): { files: string[]; output?: string } | null {
  const files: string[] = [];
  let output: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "-o" || a === "--output") {
      if (i + 1 >= argv.length) return null;
      output = argv[++i];
    } else if (a.startsWith("-")) {
      return null;
    } else {
      files.push(a);
    }
  }
  return { files, output };
}

function emit(text: string, output?: string): void {
  if (output === undefined) {
    process.stdout.write(text);
  } else {
    writeFileSync(output, text);
  }
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  const args = splitArgs(rest);
  if (args === null || command === undefined) {
    return fail(USAGE, 2);
  }
  try {
    if (command === "cactus") {
      if (args.files.length !== 1) return fail(USAGE, 2);
      const series = buildSeries(
        parseCactus(readFileSync(args.files[0], "utf-8")),
      );
      if (series.length === 0) {
        process.stderr.write("warning: no solved runs to plot\n");
      }
      emit(renderCactus(series), args.output);
      return 0;
    }
    if (command === "tables") {
      if (args.files.length !== 2) return fail(USAGE, 2);
      const scores = parseScores(readFileSync(args.files[0], "utf-8"));
      const families = parseFamily(readFileSync(args.files[1], "utf-8"));
      emit(renderTables(scores, families), args.output);
      return 0;
    }
  } catch (err) {
    if (err instanceof SchemaError) return fail(err.message, 1);
    if (err instanceof Error && "code" in err) return fail(err.message, 1);
    throw err;
  }
  return fail(`unknown command ${command}\n${USAGE}`, 2);
}
