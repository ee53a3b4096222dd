import { describe, expect, it } from "vitest";

import { segmentsFor } from "../src/highlight.js";
import type { ReviewMention } from "../src/review.js";

function mention(surface: string, label: string, start: number, end: number): ReviewMention {
  return {
    surface, label, originalLabel: label, start, end,
    source: "pattern", placeholder: null, status: "proposed",
  };
}

describe("segmentsFor", () => {
  it("interleaves text and chips in span order", () => {
    const prompt = "My name is John Doe, I live in London.";
    const segments = segmentsFor(prompt, [
      mention("London", "LOCATION", 31, 37),
      mention("John Doe", "PERSON", 11, 19),
    ]);
    expect(segments.map((s) => [s.kind, s.text])).toEqual([
      ["text", "My name is "],
      ["mention", "John Doe"],
      ["text", ", I live in "],
      ["mention", "London"],
      ["text", "."],
    ]);
    // indices refer to the caller's mention array, not span order
    expect(segments[1]!.mentionIndex).toBe(1);
    expect(segments[3]!.mentionIndex).toBe(0);
  });

  it("handles multi-byte text around chips", () => {
    const prompt = "José lives in Zürich.";
    const segments = segmentsFor(prompt, [
      mention("José", "PERSON", 0, 5),
      mention("Zürich", "LOCATION", 15, 22),
    ]);
    expect(segments.map((s) => s.text).join("")).toBe(prompt);
    expect(segments[0]!.text).toBe("José");
    expect(segments[2]!.text).toBe("Zürich");
  });

  it("returns one text segment when nothing was detected", () => {
    const segments = segmentsFor("plain", []);
    expect(segments).toEqual([{ kind: "text", text: "plain" }]);
  });
});
