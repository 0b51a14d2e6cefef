/**
 * Figure CLI.
 *
 *   relfk-plots render --spec figure.json
 *   relfk-plots <kind> --in data.csv [--in more.csv] --out figure.svg
 *                      [--xscale log|linear] [--yscale log|linear]
 *                      [--title "..."]
 *
 * Exit codes: 0 ok, 1 bad data or schema, 2 usage.
 */

import { readFileSync } from "node:fs";

import { DataError } from "./csv.js";
import { render } from "./render.js";
import { FIGURE_KINDS, FigureKind, SchemaError } from "./schema.js";
import { AxisScale, FigureSpec, loadSpec } from "./spec.js";

const USAGE = `usage:
  relfk-plots render --spec <figure.json>
  relfk-plots <${FIGURE_KINDS.join("|")}> --in <csv> [--in <csv>...] --out <svg>
              [--xscale log|linear] [--yscale log|linear] [--title <text>]`;

function parseFlags(argv: string[]): Map<string, string[]> {
  const flags = new Map<string, string[]>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i]!;
    const val = argv[i + 1];
    if (!key.startsWith("--") || val === undefined) {
      throw new UsageError(`expected "--flag value" pairs, got "${key}"`);
    }
    if (!flags.has(key)) flags.set(key, []);
    flags.get(key)!.push(val);
  }
  return flags;
}

class UsageError extends Error {}

function one(flags: Map<string, string[]>, key: string): string | undefined {
  const vals = flags.get(key);
  if (vals === undefined) return undefined;
  if (vals.length !== 1) throw new UsageError(`${key} given more than once`);
  return vals[0];
}

function scale(flags: Map<string, string[]>, key: string): AxisScale | undefined {
  const v = one(flags, key);
  if (v === undefined) return undefined;
  if (v !== "log" && v !== "linear") {
    throw new UsageError(`${key} must be "log" or "linear"`);
  }
  return v;
}

function specFromArgv(argv: string[]): FigureSpec {
  const command = argv[0];
  if (command === undefined) throw new UsageError("no command given");

  if (command === "render") {
    const flags = parseFlags(argv.slice(1));
    const path = one(flags, "--spec");
    if (path === undefined) throw new UsageError("render needs --spec <file>");
    return loadSpec(readFileSync(path, "utf-8"), path);
  }

  if (!FIGURE_KINDS.includes(command as FigureKind)) {
    throw new UsageError(`unknown command "${command}"`);
  }
  const flags = parseFlags(argv.slice(1));
  const input = flags.get("--in");
  const output = one(flags, "--out");
  if (input === undefined || output === undefined) {
    throw new UsageError(`${command} needs --in <csv> and --out <svg>`);
  }
  for (const key of flags.keys()) {
    if (!["--in", "--out", "--xscale", "--yscale", "--title"].includes(key)) {
      throw new UsageError(`unknown flag ${key}`);
    }
  }
  return {
    kind: command as FigureKind,
    input,
    output,
    xscale: scale(flags, "--xscale"),
    yscale: scale(flags, "--yscale"),
    title: one(flags, "--title"),
  };
}

export function main(argv: string[]): number {
  try {
    const spec = specFromArgv(argv);
    render(spec);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (e) {
    if (e instanceof UsageError) {
      console.error(`relfk-plots: ${e.message}\n${USAGE}`);
      return 2;
    }
    if (e instanceof DataError || e instanceof SchemaError) {
      console.error(`relfk-plots: ${e.message}`);
      return 1;
    }
    if ((e as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`relfk-plots: ${(e as Error).message}`);
      return 1;
    }
    throw e;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
