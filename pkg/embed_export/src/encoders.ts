/**
 * Deterministic offline encoders.
 *
 * These are fixed feature-hashing encoders: no model downloads, no GPU,
 * identical output for identical input on every platform. The encoder
 * identifier names the family and the vector width, e.g. "hash-256".
 */

import { tokenize } from "./text.js";

/** Tokens beyond this count are ignored; the exporter records how often. */
export const TOKEN_LIMIT = 248;

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;

function fnv1a(bytes: Uint8Array, seed: number): number {
  let h = seed >>> 0;
  for (const b of bytes) {
    h ^= b;
    h = Math.imul(h, FNV_PRIME) >>> 0;
  }
  return h >>> 0;
}

export interface HashEncoder {
  id: string;
  dim: number;
}

/** Parse an encoder identifier of the form "hash-<dim>". */
export function resolveEncoder(id: string): HashEncoder {
  const m = /^hash-(\d+)$/.exec(id);
  if (m === null) {
    throw new Error(`unknown encoder '${id}' (expected hash-<dim>, e.g. hash-256)`);
  }
  const dim = Number(m[1]);
  if (dim <= 0 || dim > 65536) {
    throw new Error(`encoder dimension out of range: ${id}`);
  }
  return { id, dim };
}

function normalized(acc: Float64Array): Float32Array {
  let sq = 0;
  for (const v of acc) {
    sq += v * v;
  }
  const norm = Math.sqrt(sq);
  const out = new Float32Array(acc.length);
  for (let i = 0; i < acc.length; i++) {
    out[i] = acc[i] / norm;
  }
  return out;
}

export interface TextEncoding {
  vector: Float32Array;
  truncated: boolean;
}

/**
 * Hash text into a unit vector, or null when no tokens survive cleaning.
 *
 * Each token lands in a bucket chosen by FNV-1a, with a second hash pass
 * deciding the sign so collisions tend to cancel rather than pile up.
 */
export function encodeText(enc: HashEncoder, text: string): TextEncoding | null {
  const tokens = tokenize(text);
  if (tokens.length === 0) {
    return null;
  }
  const truncated = tokens.length > TOKEN_LIMIT;
  const kept = truncated ? tokens.slice(0, TOKEN_LIMIT) : tokens;
  const acc = new Float64Array(enc.dim);
  for (const tok of kept) {
    const bytes = Buffer.from(tok, "utf-8");
    const bucket = fnv1a(bytes, FNV_OFFSET) % enc.dim;
    const sign = (fnv1a(bytes, FNV_OFFSET ^ 0x5bd1e995) & 1) === 0 ? 1 : -1;
    acc[bucket] += sign;
  }
  let sq = 0;
  for (const v of acc) {
    sq += v * v;
  }
  if (sq === 0) {
    return null;
  }
  return { vector: normalized(acc), truncated };
}

/**
 * Hash raw media bytes into a unit vector, or null for an empty file.
 *
 * A 256-bin byte histogram is folded onto the target width; the histogram
 * of a non-empty file always has mass, so the result is well-defined.
 */
export function encodeImage(enc: HashEncoder, bytes: Buffer): Float32Array | null {
  if (bytes.length === 0) {
    return null;
  }
  const hist = new Float64Array(256);
  for (const b of bytes) {
    hist[b] += 1;
  }
  const acc = new Float64Array(enc.dim);
  for (let bin = 0; bin < 256; bin++) {
    if (hist[bin] !== 0) {
      acc[bin % enc.dim] += hist[bin];
    }
  }
  return normalized(acc);
}
