/** Turn a prompt plus its mention list into renderable segments: plain text
 * runs interleaved with entity chips. Mentions are non-overlapping by
 * gateway contract. */

import { byteToChar } from "./bytes.js";
import type { ReviewMention } from "./review.js";

export interface Segment {
  kind: "text" | "mention";
  text: string;
  mentionIndex?: number;
  mention?: ReviewMention;
}

export function segmentsFor(prompt: string, mentions: ReviewMention[]): Segment[] {
  const ordered = mentions
    .map((mention, index) => ({ mention, index }))
    .sort((a, b) => a.mention.start - b.mention.start);
  const segments: Segment[] = [];
  let cursor = 0;
  for (const { mention, index } of ordered) {
    const charStart = byteToChar(prompt, mention.start);
    const charEnd = byteToChar(prompt, mention.end);
    if (charStart > cursor) {
      segments.push({ kind: "text", text: prompt.slice(cursor, charStart) });
    }
    segments.push({
      kind: "mention",
      text: prompt.slice(charStart, charEnd),
      mentionIndex: index,
      mention,
    });
    cursor = charEnd;
  }
  if (cursor < prompt.length) {
    segments.push({ kind: "text", text: prompt.slice(cursor) });
  }
  return segments;
}
