/** Bit-compatibility with the shared stub fixture, function-level. */

import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import test from "node:test";

import { decodePng } from "../src/png.js";
import { stubImageVector, stubTextTokens, stubTextVector, stubTokenWeight, stubVector } from "../src/stub.js";

interface TextEntry {
  model: string;
  dim: number;
  input: string;
  vector: number[];
}

interface ImageEntry {
  model: string;
  dim: number;
  png_b64: string;
  vector: number[];
}

const fixtureUrl = new URL("../../../fixtures/stub_vectors.json", import.meta.url);
const fixture = JSON.parse(readFileSync(fixtureUrl, "utf8")) as {
  stub_version: number;
  text: TextEntry[];
  image: ImageEntry[];
};

test("fixture has the expected shape", () => {
  assert.equal(fixture.stub_version, 1);
  assert.equal(fixture.text.length + fixture.image.length, 50);
});

test("every text vector matches bit for bit", () => {
  for (const entry of fixture.text) {
    const got = stubTextVector(entry.model, entry.input, entry.dim);
    assert.equal(got.length, entry.vector.length);
    for (let i = 0; i < got.length; i++) {
      // Fixture values are exact float64 renderings of float32 bits.
      assert.equal(got[i], Math.fround(entry.vector[i]), `${JSON.stringify(entry.input)} [${i}]`);
      assert.equal(got[i], entry.vector[i]);
    }
  }
});

test("every image vector matches bit for bit", () => {
  for (const entry of fixture.image) {
    const decoded = decodePng(Buffer.from(entry.png_b64, "base64"));
    const got = stubImageVector(entry.model, decoded.width, decoded.height, decoded.rgb, entry.dim);
    assert.equal(got.length, entry.vector.length);
    for (let i = 0; i < got.length; i++) {
      assert.equal(got[i], entry.vector[i], `image entry [${i}]`);
    }
  }
});

test("vectors are unit norm within 1e-4", () => {
  for (const entry of [...fixture.text, ...fixture.image]) {
    let acc = 0;
    for (const value of entry.vector) {
      acc += value * value;
    }
    assert.ok(Math.abs(Math.sqrt(acc) - 1) < 1e-4);
  }
});

test("tokenizer mirrors lowercase whitespace splitting", () => {
  assert.deepEqual(stubTextTokens(" A  Man\twith a Dog "), ["a", "man", "with", "a", "dog"]);
  assert.deepEqual(stubTextTokens(""), []);
});

test("token weights stay in [0.5, 1.5)", () => {
  for (const token of ["a", "man", "umbrella", "x".repeat(40)]) {
    const weight = stubTokenWeight("stub", token);
    assert.ok(weight >= 0.5 && weight < 1.5);
  }
});

test("raw vector determinism and byte sensitivity", () => {
  const a = stubVector(Buffer.from("hello"), 32);
  const b = stubVector(Buffer.from("hello"), 32);
  const c = stubVector(Buffer.from("hellp"), 32);
  assert.deepEqual(Array.from(a), Array.from(b));
  assert.notDeepEqual(Array.from(a), Array.from(c));
});
