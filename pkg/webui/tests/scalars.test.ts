// Counter parity with the server's Unicode-scalar rule. The expected values
// are frozen from the server-side counting of the same fixtures.

import { clampScalars, countScalars } from "../src/scalars";

const SERVER_COUNTS: [string, number][] = [
  ["hello", 5],
  ["👍", 1],
  ["👩‍🔬", 3],            // woman + ZWJ + microscope
  ["日本語です", 5],
  ["é", 2],         // combining acute accent
  ["Grüße… ✨🌍", 9],
  ["🇺🇳 flags", 8],        // regional indicator pair counts as 2
  ["क्षत्रिय", 8],
  ["𝔘𝔫𝔦𝔠𝔬𝔡𝔢", 7],          // astral-plane letters: 2 UTF-16 units, 1 scalar each
  ["a👨‍👩‍👧‍👦b", 9],
];

test("scalar counts equal the server's counts on the multilingual corpus", () => {
  for (const [text, expected] of SERVER_COUNTS) {
    expect(countScalars(text)).toBe(expected);
  }
});

test("string length in UTF-16 units would disagree, scalar counting does not", () => {
  expect("👍".length).toBe(2);
  expect(countScalars("👍")).toBe(1);
});

test("empty string counts zero", () => {
  expect(countScalars("")).toBe(0);
});

test("clamping respects scalar boundaries, never splitting surrogate pairs", () => {
  const body = "👍".repeat(300);
  const clamped = clampScalars(body);
  expect(countScalars(clamped)).toBe(280);
  expect(clamped.endsWith("👍")).toBe(true);
});
