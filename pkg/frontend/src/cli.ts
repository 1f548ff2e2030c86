#!/usr/bin/env node
/**
 * plot --kind <k> --in <csv...> --out <figure.svg>
 *
 * Reads the simulation CSVs (documented column schemas only) and writes a
 * deterministic SVG with the plotted data embedded in a metadata element.
 * Exits nonzero with a column diff on schema mismatch; an empty CSV is an
 * error and no file is written.
 */

import { writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { FigureKind, buildFigure } from "./figures.js";
import { EmptyInputError, SchemaError } from "./schema.js";
import { renderSvg } from "./svg.js";

const KINDS: FigureKind[] = [
  "negativity-vs-t",
  "saturation-inset",
  "dndt-scan",
  "threshold-scan",
  "fidelity-vs-l",
];

export function runPlot(argv: string[]): number {
  const args = yargs(argv)
    .option("kind", { choices: KINDS, demandOption: true, type: "string" })
    .option("in", { type: "string", array: true, demandOption: true })
    .option("out", { type: "string", demandOption: true })
    .option("tc-line", { type: "boolean", default: true,
                         describe: "dashed line at the d=2 critical temperature" })
    .strict()
    .exitProcess(false)
    .parseSync();

  if (!args.out.endsWith(".svg")) {
    console.error(`unsupported output format for ${args.out}: only .svg is emitted`);
    return 2;
  }
  try {
    const figure = buildFigure(args.kind as FigureKind, args.in, args["tc-line"]);
    const svg = renderSvg(figure);
    writeFileSync(args.out, svg);
    console.error(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof EmptyInputError) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(runPlot(hideBin(process.argv)));
}
