import * as fs from "fs";

import { writeLinesAtomic } from "./lib/jsonl";

export interface ConvertKgOptions {
  assertionsPath: string; // ConceptNet assertions dump (TSV)
  outPath: string;
  language: string; // e.g. "en"
  log?: (msg: string) => void;
}

export interface ConvertKgResult {
  rows: number;
  filteredLanguage: number;
  malformed: number;
}

/** "/c/en/ice_cream/n/wn/food" -> "ice_cream" (underscores kept; the core
 * pipeline normalizes them to spaces on load). */
function conceptLabel(uri: string, language: string): string | null {
  const prefix = `/c/${language}/`;
  if (!uri.startsWith(prefix)) return null;
  const label = uri.slice(prefix.length).split("/")[0];
  return label || null;
}

function relationName(uri: string): string | null {
  if (!uri.startsWith("/r/")) return null;
  const name = uri.slice(3);
  return name || null;
}

/**
 * Convert a ConceptNet assertions dump to the pipeline's head/relation/tail
 * TSV, keeping only edges whose both concepts are in the requested language.
 *
 * Assertion rows are tab-separated: assertion URI, relation URI, start
 * concept URI, end concept URI, JSON metadata. Rows that do not parse are
 * skipped and counted.
 */
export function convertKg(opts: ConvertKgOptions): ConvertKgResult {
  const log = opts.log ?? ((msg: string) => console.error(msg));
  const text = fs.readFileSync(opts.assertionsPath, "utf-8");
  const out: string[] = [];
  let malformed = 0;
  let filteredLanguage = 0;
  for (const line of text.split("\n")) {
    if (!line.trim()) continue;
    const cols = line.split("\t");
    if (cols.length < 4) {
      malformed++;
      continue;
    }
    const rel = relationName(cols[1]);
    if (rel === null) {
      malformed++;
      continue;
    }
    const head = conceptLabel(cols[2], opts.language);
    const tail = conceptLabel(cols[3], opts.language);
    if (head === null || tail === null) {
      // valid row, different language
      if (cols[2].startsWith("/c/") && cols[3].startsWith("/c/")) filteredLanguage++;
      else malformed++;
      continue;
    }
    out.push(`${head}\t${rel}\t${tail}`);
  }
  if (malformed) log(`skipped ${malformed} malformed row(s)`);
  if (out.length === 0) log(`warning: no ${opts.language} edges found; output is empty`);
  writeLinesAtomic(opts.outPath, out);
  return { rows: out.length, filteredLanguage, malformed };
}
