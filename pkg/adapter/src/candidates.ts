import { normalizeText, readJsonl, writeJsonlAtomic } from "./lib/jsonl";

const BLANK_RE = /_{3,}/;

export interface CandidatesOptions {
  datasetPath: string; // canonical JSONL {"id","stem","answer","distractors"}
  outPath: string;
  mode: "masked_lm" | "generative";
  k: number;
  /** LM endpoint: POST {mode, text, n} -> {candidates: string[]}. */
  endpoint: string;
  maskToken?: string;
  retries?: number;
  log?: (msg: string) => void;
}

export interface CandidatesResult {
  items: number;
  written: number;
  skipped: string[];
}

interface Item {
  id: string;
  stem: string;
  answer: string;
}

function parseDataset(datasetPath: string, mode: string): Item[] {
  const items: Item[] = [];
  for (const { lineNo, record } of readJsonl(datasetPath)) {
    const id = record["id"];
    const stem = record["stem"];
    const answer = record["answer"];
    if (typeof id !== "string" || typeof stem !== "string" || typeof answer !== "string") {
      throw new Error(`${datasetPath}: line ${lineNo}: expected canonical dataset record`);
    }
    items.push({ id, stem, answer });
  }
  if (mode === "masked_lm") {
    const noBlank = items.filter((it) => !BLANK_RE.test(it.stem)).map((it) => it.id);
    if (noBlank.length) {
      throw new Error(
        `masked_lm mode needs a blank marker in every stem; missing in: ${noBlank.join(", ")}`
      );
    }
  }
  return items;
}

function buildQuery(item: Item, mode: string, maskToken: string): string {
  if (mode === "masked_lm") {
    return item.stem.replace(BLANK_RE, maskToken);
  }
  return (
    `Suggest plausible but incorrect answer options for this question. ` +
    `Question: ${item.stem} Correct answer: ${item.answer}`
  );
}

async function queryLm(endpoint: string, mode: string, text: string, n: number): Promise<string[]> {
  const resp = await fetch(endpoint, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ mode, text, n }),
  });
  if (!resp.ok) throw new Error(`LM endpoint returned ${resp.status}`);
  const body = (await resp.json()) as { candidates?: unknown };
  if (!Array.isArray(body.candidates)) {
    throw new Error("LM endpoint response missing 'candidates'");
  }
  return body.candidates.map((c) => String(c));
}

export async function genCandidates(opts: CandidatesOptions): Promise<CandidatesResult> {
  if (!(opts.k > 0)) throw new Error(`k must be positive, got ${opts.k}`);
  const log = opts.log ?? ((msg: string) => console.error(msg));
  const retries = opts.retries ?? 2;
  const maskToken = opts.maskToken ?? "[MASK]";
  const items = parseDataset(opts.datasetPath, opts.mode);

  const rows: { item_id: string; candidates: string[] }[] = [];
  const skipped: string[] = [];
  for (const item of items) {
    const query = buildQuery(item, opts.mode, maskToken);
    let raw: string[] | null = null;
    for (let attempt = 0; attempt <= retries && raw === null; attempt++) {
      try {
        // over-request so dedup and answer removal still leave k options
        raw = await queryLm(opts.endpoint, opts.mode, query, opts.k * 2);
      } catch (e) {
        log(`item ${item.id}: attempt ${attempt + 1} failed: ${(e as Error).message}`);
      }
    }
    if (raw === null) {
      log(`item ${item.id}: giving up after ${retries + 1} attempts, skipping`);
      skipped.push(item.id);
      continue;
    }
    const answerNorm = normalizeText(item.answer);
    const seen = new Set<string>();
    const kept: string[] = [];
    for (const cand of raw) {
      const trimmed = cand.trim();
      const norm = normalizeText(trimmed);
      if (!norm || norm === answerNorm || seen.has(norm)) continue;
      seen.add(norm);
      kept.push(trimmed);
      if (kept.length === opts.k) break;
    }
    if (kept.length === 0) {
      log(`item ${item.id}: no usable candidates returned, skipping`);
      skipped.push(item.id);
      continue;
    }
    if (kept.length < opts.k) {
      log(`item ${item.id}: only ${kept.length}/${opts.k} candidates after filtering`);
    }
    rows.push({ item_id: item.id, candidates: kept });
  }
  writeJsonlAtomic(opts.outPath, rows);
  return { items: items.length, written: rows.length, skipped };
}
