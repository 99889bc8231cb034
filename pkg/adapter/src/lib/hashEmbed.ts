import { createHash } from "crypto";

/**
 * Deterministic token-hashing sentence encoder.
 *
 * Stands in for a neural sentence encoder in offline environments: identical
 * texts always map to identical unit vectors and no model download is needed.
 * Swap in a real encoder through the embed command's --endpoint option when
 * one is reachable.
 */
export function hashEmbed(text: string, dim: number): number[] {
  const v = new Array<number>(dim).fill(0);
  const pieces = text.split(/\s+/).filter(Boolean);
  pieces.push(text);
  for (const piece of pieces) {
    const h = createHash("sha256").update(piece, "utf-8").digest();
    const idx = h.readUInt32BE(0) % dim;
    const sign = h[4] % 2 === 0 ? 1 : -1;
    v[idx] += sign;
  }
  let norm = Math.sqrt(v.reduce((acc, x) => acc + x * x, 0));
  if (norm === 0) {
    v[0] = 1;
    norm = 1;
  }
  return v.map((x) => Number((x / norm).toFixed(8)));
}
