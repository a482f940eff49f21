#!/usr/bin/env node
import { join } from "path";
import { pathToFileURL } from "url";

import { render, type FigureTag } from "./render.js";

const INPUT_FILES: Record<FigureTag, string[]> = {
  fig1: ["rabi_timeseries.csv"],
  fig2: ["scan_p3.csv"],
  fig3: ["channels.csv"],
};

export function main(argv: string[]): number {
  const [tag, inputDir, output] = argv;
  if (!tag || !inputDir || !output) {
    console.error("usage: figures <fig1|fig2|fig3> <input-dir> <output.svg>");
    return 2;
  }
  if (!(tag in INPUT_FILES)) {
    console.error(`unknown figure tag ${tag}; expected fig1, fig2 or fig3`);
    return 2;
  }
  const figure = tag as FigureTag;
  try {
    const result = render({
      figure,
      inputs: INPUT_FILES[figure].map((name) => join(inputDir, name)),
      output,
    });
    console.log(`${output}: ${result.seriesLabels.length} series`);
    return 0;
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 1;
  }
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exitCode = main(process.argv.slice(2));
}
