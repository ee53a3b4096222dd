/** UTF-8 byte-offset helpers. The gateway addresses text by byte spans, while
 * the DOM works in UTF-16 code units, so every span crosses this boundary. */

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function byteLength(text: string): number {
  return encoder.encode(text).length;
}

/** byteOffsets(text)[i] is the byte offset of the i-th UTF-16 code unit;
 * one extra entry holds the total byte length. Surrogate pairs map both
 * halves to the code point's starting offset. */
export function byteOffsets(text: string): number[] {
  const offsets = new Array<number>(text.length + 1);
  let bytes = 0;
  let i = 0;
  while (i < text.length) {
    const cp = text.codePointAt(i)!;
    const units = cp > 0xffff ? 2 : 1;
    for (let k = 0; k < units; k++) offsets[i + k] = bytes;
    if (cp <= 0x7f) bytes += 1;
    else if (cp <= 0x7ff) bytes += 2;
    else if (cp <= 0xffff) bytes += 3;
    else bytes += 4;
    i += units;
  }
  offsets[text.length] = bytes;
  return offsets;
}

export function charToByte(text: string, charIndex: number): number {
  return byteOffsets(text)[charIndex]!;
}

/** Inverse of byteOffsets for span endpoints; byte must sit on a character
 * boundary. */
export function byteToChar(text: string, byteOffset: number): number {
  const offsets = byteOffsets(text);
  for (let i = 0; i < offsets.length; i++) {
    if (offsets[i] === byteOffset) return i;
    if (offsets[i]! > byteOffset) break;
  }
  throw new Error(`byte offset ${byteOffset} is not a character boundary`);
}

/** Extract the text at a byte span. */
export function sliceBytes(text: string, start: number, end: number): string {
  return decoder.decode(encoder.encode(text).subarray(start, end));
}

/** Replace byte spans with substitute strings in one left-to-right pass.
 * Spans must be sorted and disjoint. */
export function spliceBytes(
  text: string,
  pieces: Array<{ start: number; end: number; insert: string }>,
): string {
  const bytes = encoder.encode(text);
  const out: (Uint8Array | string)[] = [];
  let cursor = 0;
  for (const piece of pieces) {
    if (piece.start < cursor) throw new Error("spans overlap or are unsorted");
    out.push(bytes.subarray(cursor, piece.start));
    out.push(piece.insert);
    cursor = piece.end;
  }
  out.push(bytes.subarray(cursor));
  return out
    .map((part) => (typeof part === "string" ? part : decoder.decode(part)))
    .join("");
}

/** Snap a UTF-16 selection outward to whitespace-delimited token boundaries,
 * then trim surrounding whitespace. Returns null for an empty result. */
export function snapToTokens(
  text: string,
  charStart: number,
  charEnd: number,
): { start: number; end: number } | null {
  if (charStart > charEnd) [charStart, charEnd] = [charEnd, charStart];
  let start = Math.max(0, Math.min(charStart, text.length));
  let end = Math.max(0, Math.min(charEnd, text.length));
  while (start < end && /\s/.test(text[start]!)) start++;
  while (end > start && /\s/.test(text[end - 1]!)) end--;
  if (start >= end) return null;
  while (start > 0 && !/\s/.test(text[start - 1]!)) start--;
  while (end < text.length && !/\s/.test(text[end]!)) end++;
  return { start, end };
}
