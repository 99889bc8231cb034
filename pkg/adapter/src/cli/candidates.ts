#!/usr/bin/env node
import { genCandidates } from "../candidates";
import { parseArgs, runCli, UsageError } from "../lib/args";

const USAGE =
  "usage: adapter-candidates --dataset <canonical jsonl> --out <jsonl> " +
  "--mode masked_lm|generative --endpoint URL [--k 10] [--mask-token [MASK]] [--retries 2]";

runCli(async () => {
  const args = parseArgs(process.argv.slice(2), {
    required: ["dataset", "out", "mode", "endpoint"],
    optional: ["k", "mask-token", "retries"],
    usage: USAGE,
  });
  if (args.mode !== "masked_lm" && args.mode !== "generative") {
    throw new UsageError(`--mode must be masked_lm or generative\n${USAGE}`);
  }
  const k = parseInt(args.k ?? "10", 10);
  if (!(k > 0)) throw new UsageError(`--k must be a positive integer\n${USAGE}`);
  const result = await genCandidates({
    datasetPath: args.dataset,
    outPath: args.out,
    mode: args.mode,
    k,
    endpoint: args.endpoint,
    maskToken: args["mask-token"],
    retries: args.retries !== undefined ? parseInt(args.retries, 10) : undefined,
  });
  console.log(
    `candidates for ${result.written}/${result.items} item(s)` +
      (result.skipped.length ? ` (skipped: ${result.skipped.join(", ")})` : "") +
      ` -> ${args.out}`
  );
});
