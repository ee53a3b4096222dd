import { describe, expect, it } from "vitest";

import {
  byteLength,
  byteOffsets,
  byteToChar,
  charToByte,
  sliceBytes,
  snapToTokens,
  spliceBytes,
} from "../src/bytes.js";

describe("byte offset mapping", () => {
  it("is the identity for ASCII", () => {
    expect(byteOffsets("abc")).toEqual([0, 1, 2, 3]);
  });

  it("counts multi-byte characters", () => {
    // h(1) é(2) l(1) l(1) o(1)
    expect(byteOffsets("héllo")).toEqual([0, 1, 3, 4, 5, 6]);
    expect(byteLength("héllo")).toBe(6);
  });

  it("handles surrogate pairs", () => {
    const text = "a𝒳b"; // 𝒳 is 4 UTF-8 bytes, 2 UTF-16 units
    expect(byteLength(text)).toBe(6);
    expect(charToByte(text, 3)).toBe(5); // "b" starts after 1+4 bytes
    expect(byteToChar(text, 5)).toBe(3);
  });

  it("rejects offsets inside a character", () => {
    expect(() => byteToChar("é", 1)).toThrow();
  });
});

describe("sliceBytes / spliceBytes", () => {
  it("extracts byte spans", () => {
    expect(sliceBytes("My name is John Doe,", 11, 19)).toBe("John Doe");
  });

  it("replaces spans left to right", () => {
    const text = "My name is John Doe, I live in London.";
    const result = spliceBytes(text, [
      { start: 11, end: 19, insert: "[PERSON_1]" },
      { start: 31, end: 37, insert: "[LOCATION_1]" },
    ]);
    expect(result).toBe("My name is [PERSON_1], I live in [LOCATION_1].");
  });

  it("rejects overlapping spans", () => {
    expect(() =>
      spliceBytes("abcdef", [
        { start: 0, end: 4, insert: "x" },
        { start: 2, end: 5, insert: "y" },
      ]),
    ).toThrow();
  });
});

describe("snapToTokens", () => {
  const text = "My client, Rosa Takeda, resides here.";

  it("expands a partial selection to token boundaries", () => {
    const span = snapToTokens(text, text.indexOf("osa"), text.indexOf("osa") + 3);
    expect(text.slice(span!.start, span!.end)).toBe("Rosa");
  });

  it("spans multiple tokens", () => {
    const start = text.indexOf("Rosa") + 2;
    const end = text.indexOf("Takeda") + 2;
    const span = snapToTokens(text, start, end);
    expect(text.slice(span!.start, span!.end)).toBe("Rosa Takeda,");
  });

  it("trims pure whitespace selections", () => {
    expect(snapToTokens(text, 2, 3)).toBeNull(); // the space after "My"
  });

  it("accepts reversed selections", () => {
    const span = snapToTokens(text, text.indexOf("osa") + 3, text.indexOf("osa"));
    expect(text.slice(span!.start, span!.end)).toBe("Rosa");
  });
});
