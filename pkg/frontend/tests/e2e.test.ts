/** Live round trip against a real gateway process with an echo upstream.
 * Exercises the same state machine and HTTP client the browser runs. */

import { spawn, type ChildProcess } from "node:child_process";
import { createHash } from "node:crypto";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api.js";
import { ReviewState } from "../src/review.js";

const SENTENCE = "My name is John Doe, I live in London.";
const PORT = 8400 + Math.floor(Math.random() * 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
const client = new GatewayClient(BASE);

async function waitForGateway(): Promise<void> {
  const deadline = Date.now() + 20_000;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/v1/sessions`, { method: "POST", body: "{}" });
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("gateway did not come up");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "review-ui-e2e-"));
  const gazetteer = join(dir, "gazetteer.json");
  writeFileSync(gazetteer, JSON.stringify({
    gazetteer: { PERSON: ["John Doe"], LOCATION: ["London"] },
    rules: {},
  }));
  const config = join(dir, "config.json");
  writeFileSync(config, JSON.stringify({
    upstream_url: "echo",
    detector: "pattern",
    gazetteer_path: gazetteer,
    vault_dir: join(dir, "sessions"),
    listen: `127.0.0.1:${PORT}`,
  }));
  server = spawn("python3", ["-m", "promptmask.cli", "serve", "--config", config], {
    stdio: "ignore",
  });
  await waitForGateway();
}, 30_000);

afterAll(() => {
  server?.kill();
});

async function maskedReviewState(): Promise<ReviewState> {
  const state = new ReviewState();
  state.sessionId = await client.createSession();
  state.setDraft(SENTENCE);
  const masked = await client.mask(state.sessionId, SENTENCE);
  const vault = await client.vault(state.sessionId);
  state.applyServerMask(masked, vault);
  return state;
}

describe("review round trip (echo upstream)", () => {
  it("dispatching the approved mask returns the draft verbatim", async () => {
    const state = await maskedReviewState();
    expect(state.mentions.map((m) => m.label)).toEqual(["PERSON", "LOCATION"]);

    state.approveAll();
    const preview = state.maskedPreview();
    expect(preview).toBe(state.serverMaskedText);
    expect(state.canDispatch()).toBe(true);

    const payload = state.dispatchPayload();
    const outcome = await client.dispatch(state.sessionId!, payload.mask_hash, payload.edits);
    expect(outcome.reply).toBe(SENTENCE);
    expect(outcome.unresolved).toEqual([]);

    // the preview shown before dispatch is exactly what went out
    const transcript = await client.transcript(state.sessionId!);
    expect(transcript).toHaveLength(1);
    expect(transcript[0]!.masked_prompt).toBe(preview);
    const previewHash = createHash("sha256").update(preview, "utf8").digest("hex");
    expect(previewHash).toBe(payload.mask_hash);
  });
});

describe("edit propagation", () => {
  it("a removed chip's surface reaches the upstream body unmasked", async () => {
    const state = await maskedReviewState();
    const london = state.mentions.findIndex((m) => m.surface === "London");
    state.approveAll();
    state.setStatus(london, "removed");
    expect(state.maskedPreview()).toBe("My name is [PERSON_1], I live in London.");

    const payload = state.dispatchPayload();
    expect(payload.edits).toEqual([{ action: "remove", start: 31, end: 37 }]);
    const outcome = await client.dispatch(state.sessionId!, payload.mask_hash, payload.edits);
    expect(outcome.reply).toBe(SENTENCE);

    const transcript = await client.transcript(state.sessionId!);
    const sent = transcript[transcript.length - 1]!.masked_prompt;
    expect(sent).toContain("London");
    expect(sent).toContain("[PERSON_1]");
    expect(sent).not.toContain("John Doe");
    expect(sent).toBe(state.maskedPreview());
  });
});

describe("stale mask handling", () => {
  it("the gateway rejects an outdated hash so the UI can re-mask", async () => {
    const state = await maskedReviewState();
    state.approveAll();
    await client.mask(state.sessionId!, "a different prompt entirely");
    await expect(
      client.dispatch(state.sessionId!, state.maskHash!, []),
    ).rejects.toMatchObject({ code: "StaleMask", status: 409 });
  });
});
