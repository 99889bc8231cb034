#!/usr/bin/env node
import { prepareFinetune } from "../finetune";
import { parseArgs, runCli, UsageError } from "../lib/args";

const USAGE =
  "usage: adapter-finetune --train <jsonl> --out-dir <dir> --model bart|t5 " +
  "[--dev <jsonl>] [--epochs 40] [--batch-size 32] [--learning-rate LR]";

runCli(() => {
  const args = parseArgs(process.argv.slice(2), {
    required: ["train", "out-dir", "model"],
    optional: ["dev", "epochs", "batch-size", "learning-rate"],
    usage: USAGE,
  });
  if (args.model !== "bart" && args.model !== "t5") {
    throw new UsageError(`--model must be bart or t5\n${USAGE}`);
  }
  const result = prepareFinetune({
    trainPath: args.train,
    devPath: args.dev,
    outDir: args["out-dir"],
    model: args.model,
    epochs: args.epochs !== undefined ? parseInt(args.epochs, 10) : undefined,
    batchSize: args["batch-size"] !== undefined ? parseInt(args["batch-size"], 10) : undefined,
    learningRate:
      args["learning-rate"] !== undefined ? parseFloat(args["learning-rate"]) : undefined,
  });
  console.log(
    `prepared ${result.train} train / ${result.dev} dev pair(s); config at ${result.configPath}`
  );
});
