/**
 * Deterministic stub embeddings, bit-compatible with the Python core.
 *
 * The contract (pinned by fixtures/stub_vectors.json at the repository
 * root):
 *  - expansion: sha256(seed || uint32_be(counter)) digests split into
 *    big-endian uint32 words, each mapped to `u / 2**31 - 1` (exact in
 *    IEEE-754 float64);
 *  - all accumulation is plain sequential float64 arithmetic;
 *  - vectors are L2-normalized in float64, then rounded to float32.
 *
 * Text inputs embed as a weighted bag of lowercased whitespace tokens;
 * image inputs embed from decoded RGB pixels framed as
 * "RGB8" || u32be(width) || u32be(height) || pixels.
 */

import { createHash } from "node:crypto";

const TOKEN_TAG = Buffer.from("\x00tok\x00", "latin1");
const WEIGHT_TAG = Buffer.from("\x00wgt\x00", "latin1");
const IMAGE_TAG = Buffer.from("\x00img\x00", "latin1");
const EMPTY_TEXT_PAYLOAD = Buffer.from("\x00empty-text", "latin1");

function sha256(data: Buffer): Buffer {
  return createHash("sha256").update(data).digest();
}

function expand(seed: Buffer, dim: number): Float64Array {
  const values = new Float64Array(dim);
  let produced = 0;
  let counter = 0;
  while (produced < dim) {
    const suffix = Buffer.alloc(4);
    suffix.writeUInt32BE(counter, 0);
    const digest = sha256(Buffer.concat([seed, suffix]));
    for (let off = 0; off < 32 && produced < dim; off += 4) {
      values[produced++] = digest.readUInt32BE(off) / 2147483648 - 1;
    }
    counter++;
  }
  return values;
}

function normalize(values: Float64Array): Float64Array {
  let acc = 0;
  for (let i = 0; i < values.length; i++) {
    acc += values[i] * values[i];
  }
  const norm = Math.sqrt(acc);
  if (norm === 0) {
    throw new Error("stub expansion produced a zero vector");
  }
  const out = new Float64Array(values.length);
  for (let i = 0; i < values.length; i++) {
    out[i] = values[i] / norm;
  }
  return out;
}

export function stubVector(data: Buffer, dim: number): Float32Array {
  if (dim < 2) {
    throw new Error(`stub dim must be >= 2, got ${dim}`);
  }
  return Float32Array.from(normalize(expand(data, dim)));
}

export function stubTextTokens(text: string): string[] {
  return text.toLowerCase().split(/\s+/u).filter((token) => token.length > 0);
}

export function stubTokenWeight(model: string, token: string): number {
  const seed = Buffer.concat([Buffer.from(model, "utf8"), WEIGHT_TAG, Buffer.from(token, "utf8")]);
  return 0.5 + sha256(seed).readUInt32BE(0) / 4294967296;
}

export function stubTextVector(model: string, text: string, dim: number): Float32Array {
  const tokens = stubTextTokens(text);
  if (tokens.length === 0) {
    return stubVector(Buffer.concat([Buffer.from(model, "utf8"), EMPTY_TEXT_PAYLOAD]), dim);
  }
  const acc = new Float64Array(dim);
  for (const token of tokens) {
    const tokenBytes = Buffer.from(token, "utf8");
    const weight = stubTokenWeight(model, token);
    const seed = Buffer.concat([Buffer.from(model, "utf8"), TOKEN_TAG, tokenBytes]);
    const unit = normalize(expand(seed, dim));
    for (let i = 0; i < dim; i++) {
      acc[i] += weight * unit[i];
    }
  }
  return Float32Array.from(normalize(acc));
}

export function stubImagePayload(width: number, height: number, rgb: Buffer): Buffer {
  if (rgb.length !== width * height * 3) {
    throw new Error("rgb byte count does not match width*height*3");
  }
  const header = Buffer.alloc(12);
  header.write("RGB8", 0, "latin1");
  header.writeUInt32BE(width, 4);
  header.writeUInt32BE(height, 8);
  return Buffer.concat([header, rgb]);
}

export function stubImageVector(
  model: string,
  width: number,
  height: number,
  rgb: Buffer,
  dim: number,
): Float32Array {
  const seed = Buffer.concat([
    Buffer.from(model, "utf8"),
    IMAGE_TAG,
    stubImagePayload(width, height, rgb),
  ]);
  return stubVector(seed, dim);
}
