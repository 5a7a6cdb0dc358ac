/**
 * Minimal PNG decoder: 8-bit depth, color types 0 (gray), 2 (RGB) and
 * 6 (RGBA), non-interlaced. That covers every image the pipeline writes
 * (lossless RGB PNG) and the shared stub fixture. Output is always packed
 * RGB, matching the byte stream the Python side hashes after its own
 * RGB conversion (alpha dropped, gray replicated).
 */

import { inflateSync } from "node:zlib";

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

export interface DecodedImage {
  width: number;
  height: number;
  rgb: Buffer;
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

function unfilter(raw: Buffer, width: number, height: number, channels: number): Buffer {
  const stride = width * channels;
  const out = Buffer.alloc(stride * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const rowStart = y * (stride + 1) + 1;
    const outStart = y * stride;
    for (let x = 0; x < stride; x++) {
      const value = raw[rowStart + x];
      const left = x >= channels ? out[outStart + x - channels] : 0;
      const up = y > 0 ? out[outStart + x - stride] : 0;
      const upLeft = y > 0 && x >= channels ? out[outStart + x - channels - stride] : 0;
      let decoded: number;
      switch (filter) {
        case 0:
          decoded = value;
          break;
        case 1:
          decoded = value + left;
          break;
        case 2:
          decoded = value + up;
          break;
        case 3:
          decoded = value + ((left + up) >> 1);
          break;
        case 4:
          decoded = value + paeth(left, up, upLeft);
          break;
        default:
          throw new Error(`unsupported PNG filter type ${filter}`);
      }
      out[outStart + x] = decoded & 0xff;
    }
  }
  return out;
}

export function decodePng(data: Buffer): DecodedImage {
  if (data.length < 8 || !data.subarray(0, 8).equals(SIGNATURE)) {
    throw new Error("not a PNG file");
  }
  let offset = 8;
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  let colorType = 0;
  let interlace = 0;
  const idat: Buffer[] = [];
  while (offset + 8 <= data.length) {
    const length = data.readUInt32BE(offset);
    const type = data.subarray(offset + 4, offset + 8).toString("latin1");
    const body = data.subarray(offset + 8, offset + 8 + length);
    offset += 12 + length; // length + type + body + crc
    if (type === "IHDR") {
      width = body.readUInt32BE(0);
      height = body.readUInt32BE(4);
      bitDepth = body[8];
      colorType = body[9];
      interlace = body[12];
    } else if (type === "IDAT") {
      idat.push(body);
    } else if (type === "IEND") {
      break;
    }
  }
  if (width === 0 || height === 0) {
    throw new Error("PNG has a zero dimension or missing IHDR");
  }
  if (bitDepth !== 8 || interlace !== 0) {
    throw new Error(`unsupported PNG: bit depth ${bitDepth}, interlace ${interlace}`);
  }
  const channelsByType: Record<number, number> = { 0: 1, 2: 3, 6: 4 };
  const channels = channelsByType[colorType];
  if (channels === undefined) {
    throw new Error(`unsupported PNG color type ${colorType}`);
  }
  const raw = inflateSync(Buffer.concat(idat));
  const expected = height * (width * channels + 1);
  if (raw.length !== expected) {
    throw new Error(`PNG payload is ${raw.length} bytes, expected ${expected}`);
  }
  const pixels = unfilter(raw, width, height, channels);
  if (channels === 3) {
    return { width, height, rgb: pixels };
  }
  const rgb = Buffer.alloc(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    if (channels === 4) {
      rgb[3 * i] = pixels[4 * i];
      rgb[3 * i + 1] = pixels[4 * i + 1];
      rgb[3 * i + 2] = pixels[4 * i + 2];
    } else {
      rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = pixels[i];
    }
  }
  return { width, height, rgb };
}
