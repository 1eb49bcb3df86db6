/**
 * Binary embedding container, byte-compatible with the gareco loader.
 *
 * Layout (all integers little-endian):
 *   magic   4 bytes  "SGEM"
 *   version u32      currently 1
 *   dim     u32      vector width, identical for every record
 *   count   u64      number of records
 *   record  u16 key length, UTF-8 key bytes, dim float32 components
 */

export const MAGIC = "SGEM";
export const FORMAT_VERSION = 1;

export interface EmbeddingRecord {
  key: string;
  vector: Float32Array;
}

const HEADER_BYTES = 4 + 4 + 4 + 8;

/** Serialize records into a single buffer ready to be written to disk. */
export function encodeEmbeddings(dim: number, records: EmbeddingRecord[]): Buffer {
  if (!Number.isInteger(dim) || dim <= 0) {
    throw new Error(`dimension must be a positive integer, got ${dim}`);
  }
  const seen = new Set<string>();
  const keyBufs: Buffer[] = [];
  let body = 0;
  for (const rec of records) {
    if (rec.key.length === 0) {
      throw new Error("record key must be non-empty");
    }
    if (seen.has(rec.key)) {
      throw new Error(`duplicate key: ${rec.key}`);
    }
    seen.add(rec.key);
    if (rec.vector.length !== dim) {
      throw new Error(
        `vector for ${rec.key} has dim ${rec.vector.length}, expected ${dim}`,
      );
    }
    for (const v of rec.vector) {
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite component in vector for ${rec.key}`);
      }
    }
    const kb = Buffer.from(rec.key, "utf-8");
    if (kb.length > 0xffff) {
      throw new Error(`key too long: ${rec.key.slice(0, 40)}...`);
    }
    keyBufs.push(kb);
    body += 2 + kb.length + dim * 4;
  }

  const buf = Buffer.alloc(HEADER_BYTES + body);
  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt32LE(FORMAT_VERSION, 4);
  buf.writeUInt32LE(dim, 8);
  buf.writeBigUInt64LE(BigInt(records.length), 12);

  let off = HEADER_BYTES;
  records.forEach((rec, i) => {
    const kb = keyBufs[i];
    buf.writeUInt16LE(kb.length, off);
    off += 2;
    kb.copy(buf, off);
    off += kb.length;
    for (const v of rec.vector) {
      buf.writeFloatLE(v, off);
      off += 4;
    }
  });
  return buf;
}

/** Parse a buffer produced by {@link encodeEmbeddings} (or the Python writer). */
export function decodeEmbeddings(buf: Buffer): { dim: number; records: EmbeddingRecord[] } {
  if (buf.length < HEADER_BYTES || buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error("not an embedding file: bad magic");
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new Error(`unsupported format version ${version}`);
  }
  const dim = buf.readUInt32LE(8);
  const count = Number(buf.readBigUInt64LE(12));
  const records: EmbeddingRecord[] = [];
  let off = HEADER_BYTES;
  for (let i = 0; i < count; i++) {
    const keyLen = buf.readUInt16LE(off);
    off += 2;
    const key = buf.toString("utf-8", off, off + keyLen);
    off += keyLen;
    const vector = new Float32Array(dim);
    for (let j = 0; j < dim; j++) {
      vector[j] = buf.readFloatLE(off);
      off += 4;
    }
    records.push({ key, vector });
  }
  if (off !== buf.length) {
    throw new Error(`trailing bytes after ${count} records`);
  }
  return { dim, records };
}
