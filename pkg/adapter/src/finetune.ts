import * as fs from "fs";
import * as path from "path";

import { readJsonl, writeJsonlAtomic } from "./lib/jsonl";

export interface FinetuneOptions {
  /** Either pretraining (build-rap) or augmented-input (build-kag) JSONL. */
  trainPath: string;
  devPath?: string;
  outDir: string;
  model: "bart" | "t5";
  epochs?: number;
  batchSize?: number;
  learningRate?: number;
}

export interface FinetuneResult {
  train: number;
  dev: number;
  configPath: string;
}

// Reference hyperparameters for the seq2seq trainers this feeds.
const DEFAULT_LR: Record<string, number> = { bart: 2e-5, t5: 1e-4 };
const DEFAULT_BASE: Record<string, string> = { bart: "facebook/bart-base", t5: "t5-base" };

function toPairs(filePath: string): { input: string; target: string }[] {
  const pairs: { input: string; target: string }[] = [];
  for (const { lineNo, record } of readJsonl(filePath)) {
    const input = record["input"];
    const target = record["target"];
    if (typeof input !== "string" || typeof target !== "string") {
      throw new Error(`${filePath}: line ${lineNo}: expected 'input' and 'target' fields`);
    }
    pairs.push({ input, target });
  }
  return pairs;
}

/**
 * Prepare a text2text fine-tuning run directory: train/dev pairs in the
 * plain {input, target} shape seq2seq trainers consume, plus a config
 * capturing the hyperparameters. Running the trainer itself is out of scope
 * here; the config documents everything a standard HF-style script needs.
 */
export function prepareFinetune(opts: FinetuneOptions): FinetuneResult {
  const train = toPairs(opts.trainPath);
  if (train.length === 0) throw new Error(`${opts.trainPath}: no training pairs`);
  const dev = opts.devPath ? toPairs(opts.devPath) : [];

  fs.mkdirSync(opts.outDir, { recursive: true });
  writeJsonlAtomic(path.join(opts.outDir, "train.jsonl"), train);
  if (dev.length) writeJsonlAtomic(path.join(opts.outDir, "dev.jsonl"), dev);

  const config = {
    base_model: DEFAULT_BASE[opts.model],
    model_type: opts.model,
    epochs: opts.epochs ?? 40,
    batch_size: opts.batchSize ?? 32,
    learning_rate: opts.learningRate ?? DEFAULT_LR[opts.model],
    optimizer: "adamw",
    train_file: "train.jsonl",
    dev_file: dev.length ? "dev.jsonl" : null,
    text_column: "input",
    target_column: "target",
  };
  const configPath = path.join(opts.outDir, "finetune_config.json");
  fs.writeFileSync(configPath, JSON.stringify(config, null, 2) + "\n", "utf-8");
  return { train: train.length, dev: dev.length, configPath };
}
