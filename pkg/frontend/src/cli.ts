#!/usr/bin/env node
/**
 * Figure renderer for the simulator's CSV outputs.  One subcommand per
 * figure id; ``--dry-run`` prints the plotted data ranges instead of writing
 * the SVG.  Display only: no physics is recomputed here.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { SchemaError } from "./csv";
import { FIGURES } from "./figures";
import { dryRunReport, renderToFile } from "./render";

interface Args {
  input: string;
  out?: string;
  dryRun: boolean;
  width: number;
  height: number;
  slices?: string;
}

function handle(figureId: string, argv: Args): void {
  if (argv.dryRun) {
    for (const line of dryRunReport(figureId, argv.input)) console.log(line);
    return;
  }
  if (!argv.out) throw new SchemaError("--out is required unless --dry-run");
  const slices = argv.slices
    ? argv.slices.split(",").map((tok) => Number(tok))
    : undefined;
  if (slices && slices.some((v) => Number.isNaN(v))) {
    throw new SchemaError(`--slices must be a comma-separated number list`);
  }
  const path = renderToFile({
    figureId,
    inputPath: argv.input,
    outputPath: argv.out,
    width: argv.width,
    height: argv.height,
    options: { slices },
  });
  console.log(`wrote ${path}`);
}

export function main(argv: string[]): Promise<unknown> {
  let parser = yargs(argv)
    .scriptName("darwinbath-figures")
    .strict()
    .demandCommand(1)
    .fail((msg, err) => {
      console.error(err instanceof SchemaError ? `error: ${err.message}` : msg ?? String(err));
      process.exitCode = 1;
    });
  for (const spec of Object.values(FIGURES)) {
    parser = parser.command(
      spec.id,
      `${spec.title} (reads a '${spec.source}' table)`,
      (cmd) =>
        cmd
          .option("input", { type: "string", demandOption: true, describe: "CSV table" })
          .option("out", { type: "string", describe: "output SVG path" })
          .option("dry-run", {
            type: "boolean",
            default: false,
            describe: "print plotted data ranges, write nothing",
          })
          .option("width", { type: "number", default: 860 })
          .option("height", { type: "number", default: 640 })
          .option("slices", {
            type: "string",
            describe: "decay_rate*t slice targets (fig4/fig7)",
          }),
      (parsed) => handle(spec.id, parsed as unknown as Args)
    );
  }
  return parser.parseAsync();
}

if (require.main === module) {
  main(hideBin(process.argv)).catch((err) => {
    console.error(err instanceof SchemaError ? `error: ${err.message}` : err);
    process.exitCode = 1;
  });
}
