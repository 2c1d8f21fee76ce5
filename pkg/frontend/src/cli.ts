#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { render } from "./render.js";

yargs(hideBin(process.argv))
  .command(
    "plot",
    "render a sweep-summary CSV to an SVG figure",
    (y) =>
      y.option("spec", {
        type: "string",
        demandOption: true,
        describe: "path to a plot-spec JSON file",
      }),
    (argv) => {
      try {
        const figure = render(argv.spec);
        console.log(
          `rendered ${figure.series.length} series (${figure.series
            .map((s) => s.scheme)
            .join(", ")})`
        );
      } catch (err) {
        console.error((err as Error).message);
        process.exit(1);
      }
    }
  )
  .demandCommand(1)
  .strict()
  .help()
  .parse();
