#!/usr/bin/env node
import { convertKg } from "../convertKg";
import { parseArgs, runCli } from "../lib/args";

const USAGE = "usage: adapter-convert-kg --assertions <csv> --out <tsv> [--language en]";

runCli(() => {
  const args = parseArgs(process.argv.slice(2), {
    required: ["assertions", "out"],
    optional: ["language"],
    usage: USAGE,
  });
  const result = convertKg({
    assertionsPath: args.assertions,
    outPath: args.out,
    language: args.language ?? "en",
  });
  console.log(
    `${result.rows} edge(s) kept, ${result.filteredLanguage} other-language, ` +
      `${result.malformed} malformed -> ${args.out}`
  );
});
