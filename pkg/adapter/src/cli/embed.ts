#!/usr/bin/env node
import { embed } from "../embed";
import { parseArgs, runCli } from "../lib/args";

const USAGE =
  "usage: adapter-embed --requests <jsonl> --out <jsonl> [--model hash-256] [--endpoint URL]";

runCli(async () => {
  const args = parseArgs(process.argv.slice(2), {
    required: ["requests", "out"],
    optional: ["model", "endpoint"],
    usage: USAGE,
  });
  const result = await embed({
    requestsPath: args.requests,
    outPath: args.out,
    model: args.model ?? "hash-256",
    endpoint: args.endpoint,
  });
  console.log(`embedded ${result.count} text(s) at dim ${result.dim} -> ${args.out}`);
});
