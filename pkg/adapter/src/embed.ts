import { hashEmbed } from "./lib/hashEmbed";
import { readJsonl, writeLinesAtomic } from "./lib/jsonl";

export interface EmbedOptions {
  requestsPath: string;
  outPath: string;
  /** "hash-<dim>" for the built-in encoder, anything else requires endpoint. */
  model: string;
  /** Optional HTTP encoder: POST {model, texts[]} -> {vectors[][]}. */
  endpoint?: string;
}

export interface EmbedResult {
  count: number;
  dim: number;
}

interface Request {
  id: string;
  text: string;
}

function parseRequests(requestsPath: string): Request[] {
  const rows = readJsonl(requestsPath);
  const seen = new Set<string>();
  const out: Request[] = [];
  for (const { lineNo, record } of rows) {
    const id = record["id"];
    const text = record["text"];
    if (typeof id !== "string" || typeof text !== "string") {
      throw new Error(`${requestsPath}: line ${lineNo}: expected string 'id' and 'text'`);
    }
    if (seen.has(id)) {
      throw new Error(`${requestsPath}: line ${lineNo}: duplicate id ${JSON.stringify(id)}`);
    }
    seen.add(id);
    out.push({ id, text });
  }
  return out;
}

async function endpointVectors(endpoint: string, model: string, texts: string[]): Promise<number[][]> {
  const resp = await fetch(endpoint, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ model, texts }),
  });
  if (!resp.ok) {
    throw new Error(`encoder endpoint returned ${resp.status}`);
  }
  const body = (await resp.json()) as { vectors?: number[][] };
  if (!Array.isArray(body.vectors) || body.vectors.length !== texts.length) {
    throw new Error("encoder endpoint response missing 'vectors' of matching length");
  }
  return body.vectors;
}

export async function embed(opts: EmbedOptions): Promise<EmbedResult> {
  const requests = parseRequests(opts.requestsPath);
  let vectors: number[][];
  let dim: number;

  const hashMatch = /^hash-(\d+)$/.exec(opts.model);
  if (hashMatch) {
    dim = parseInt(hashMatch[1], 10);
    if (!(dim > 0)) throw new Error(`invalid hash encoder dimension in ${opts.model}`);
    vectors = requests.map((r) => hashEmbed(r.text, dim));
  } else if (opts.endpoint) {
    vectors = requests.length
      ? await endpointVectors(opts.endpoint, opts.model, requests.map((r) => r.text))
      : [];
    dim = vectors[0]?.length ?? 0;
    if (requests.length && !(dim > 0)) throw new Error("encoder returned empty vectors");
    for (const v of vectors) {
      if (v.length !== dim) throw new Error("encoder returned vectors of mixed dimension");
    }
  } else {
    throw new Error(
      `model ${JSON.stringify(opts.model)} needs --endpoint (or use the built-in hash-<dim>)`
    );
  }

  const lines = [JSON.stringify({ dim })];
  requests.forEach((r, i) => lines.push(JSON.stringify({ id: r.id, vector: vectors[i] })));
  writeLinesAtomic(opts.outPath, lines);
  return { count: requests.length, dim };
}
