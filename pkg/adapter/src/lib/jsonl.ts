import * as fs from "fs";
import * as path from "path";

/** Matches the core pipeline's text normalization: NFC, trim, collapse, lowercase. */
export function normalizeText(s: string): string {
  return s.normalize("NFC").split(/\s+/).filter(Boolean).join(" ").toLowerCase();
}

export interface JsonlLine {
  lineNo: number;
  record: Record<string, unknown>;
}

/** Read JSONL records, skipping a leading {"_header": ...} line. */
export function readJsonl(filePath: string): JsonlLine[] {
  const text = fs.readFileSync(filePath, "utf-8");
  const out: JsonlLine[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let record: unknown;
    try {
      record = JSON.parse(line);
    } catch (e) {
      throw new Error(`${filePath}: line ${i + 1}: invalid JSON`);
    }
    if (typeof record !== "object" || record === null || Array.isArray(record)) {
      throw new Error(`${filePath}: line ${i + 1}: expected a JSON object`);
    }
    const rec = record as Record<string, unknown>;
    if (i === 0 && "_header" in rec) continue;
    out.push({ lineNo: i + 1, record: rec });
  }
  return out;
}

/** Write lines atomically: temp file in the same directory, then rename. */
export function writeLinesAtomic(filePath: string, lines: string[]): void {
  fs.mkdirSync(path.dirname(path.resolve(filePath)), { recursive: true });
  const tmp = filePath + ".tmp";
  fs.writeFileSync(tmp, lines.map((l) => l + "\n").join(""), "utf-8");
  fs.renameSync(tmp, filePath);
}

export function writeJsonlAtomic(filePath: string, rows: unknown[]): void {
  writeLinesAtomic(filePath, rows.map((r) => JSON.stringify(r)));
}
