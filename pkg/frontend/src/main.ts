/** DOM wiring for the review console. One session per tab; the server is the
 * source of truth for vault contents and mask hashes. */

import { ApiError, GatewayClient } from "./api.js";
import { segmentsFor } from "./highlight.js";
import { ReviewState } from "./review.js";
import { ENTITY_LABELS } from "./types.js";

const state = new ReviewState();
let client = new GatewayClient("http://127.0.0.1:8120");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const draftEl = () => el<HTMLTextAreaElement>("draft");
const statusEl = () => el<HTMLDivElement>("status");

function setStatus(text: string, kind: "info" | "error" = "info"): void {
  statusEl().textContent = text;
  statusEl().className = `status ${kind}`;
}

function renderChips(): void {
  const container = el<HTMLDivElement>("highlights");
  container.textContent = "";
  if (!state.maskIsCurrent()) {
    container.textContent = "Detect entities to review the draft.";
    renderPreview();
    return;
  }
  for (const segment of segmentsFor(state.draft, state.mentions)) {
    if (segment.kind === "text") {
      container.appendChild(document.createTextNode(segment.text));
      continue;
    }
    const mention = segment.mention!;
    const chip = document.createElement("span");
    chip.className = `chip ${mention.status}`;
    chip.title = `${mention.label} (${mention.source})`;
    chip.textContent = segment.text;
    const tag = document.createElement("small");
    tag.textContent = ` ${mention.label}`;
    chip.appendChild(tag);

    const approve = document.createElement("button");
    approve.textContent = "✓";
    approve.title = "approve mask";
    approve.onclick = () => {
      if (mention.status !== "added") state.setStatus(segment.mentionIndex!, "approved");
      renderAll();
    };
    const remove = document.createElement("button");
    remove.textContent = "✗";
    remove.title = "keep original text";
    remove.onclick = () => {
      state.setStatus(segment.mentionIndex!, "removed");
      renderAll();
    };
    chip.append(approve, remove);
    container.appendChild(chip);
  }
  renderPreview();
}

function renderPreview(): void {
  el<HTMLPreElement>("preview").textContent = state.maskIsCurrent()
    ? state.maskedPreview()
    : "(no current mask)";
  const gate = el<HTMLDivElement>("unmasked-gate");
  gate.style.display =
    state.maskIsCurrent() && state.activeMentions().length === 0 ? "block" : "none";
  el<HTMLButtonElement>("dispatch").disabled = !state.canDispatch();
}

function renderReply(): void {
  const section = el<HTMLDivElement>("reply-section");
  if (!state.reply) {
    section.style.display = "none";
    return;
  }
  section.style.display = "block";
  const showMasked = el<HTMLInputElement>("show-masked").checked;
  el<HTMLPreElement>("reply").textContent = showMasked
    ? state.reply.masked
    : state.reply.unmasked;
  el<HTMLDivElement>("unresolved").textContent = state.reply.unresolved.length
    ? `Unresolved placeholders: ${state.reply.unresolved.join(", ")}`
    : "";
}

async function renderVault(): Promise<void> {
  const table = el<HTMLTableSectionElement>("vault-body");
  table.textContent = "";
  if (!state.sessionId) return;
  const vault = await client.vault(state.sessionId);
  for (const entry of vault.entries) {
    const row = table.insertRow();
    row.insertCell().textContent = entry.placeholder;
    row.insertCell().textContent = entry.label;
    row.insertCell().textContent = entry.surface;
  }
}

function renderAll(): void {
  renderChips();
  renderReply();
}

async function runMask(): Promise<void> {
  state.setDraft(draftEl().value);
  if (!state.draft) {
    setStatus("Nothing to mask: the draft is empty.", "error");
    return;
  }
  if (!state.sessionId) state.sessionId = await client.createSession();
  const masked = await client.mask(state.sessionId, state.draft);
  const vault = await client.vault(state.sessionId);
  state.applyServerMask(masked, vault);
  setStatus(
    masked.mentions.length
      ? `${masked.mentions.length} entities proposed; review each chip.`
      : "No entities found; confirm before sending unmasked.",
  );
  renderAll();
  await renderVault();
}

async function runDispatch(): Promise<void> {
  if (!state.sessionId) return;
  const payload = state.dispatchPayload();
  try {
    const outcome = await client.dispatch(state.sessionId, payload.mask_hash, payload.edits);
    state.reply = {
      masked: outcome.masked_reply,
      unmasked: outcome.reply,
      unresolved: outcome.unresolved,
    };
    setStatus("Reply received and unmasked.");
    renderAll();
    await renderVault();
  } catch (err) {
    if (err instanceof ApiError && err.code === "StaleMask") {
      setStatus("Mask was stale; re-masked — please review again.", "error");
      await runMask();
      return;
    }
    throw err;
  }
}

function wire(): void {
  el<HTMLInputElement>("gateway-url").onchange = (event) => {
    client = new GatewayClient((event.target as HTMLInputElement).value);
    state.sessionId = null;
  };
  el<HTMLButtonElement>("mask").onclick = () => {
    runMask().catch((err) => setStatus(String(err), "error"));
  };
  el<HTMLButtonElement>("approve-all").onclick = () => {
    state.approveAll();
    renderAll();
  };
  el<HTMLButtonElement>("dispatch").onclick = () => {
    runDispatch().catch((err) => setStatus(String(err), "error"));
  };
  el<HTMLInputElement>("confirm-unmasked").onchange = (event) => {
    state.confirmSendUnmasked = (event.target as HTMLInputElement).checked;
    renderPreview();
  };
  el<HTMLInputElement>("show-masked").onchange = renderReply;
  draftEl().oninput = () => {
    state.setDraft(draftEl().value);
    renderAll();
  };
  const labelSelect = el<HTMLSelectElement>("add-label");
  for (const label of ENTITY_LABELS) {
    const option = document.createElement("option");
    option.value = label;
    option.textContent = label;
    labelSelect.appendChild(option);
  }
  el<HTMLButtonElement>("add-mention").onclick = () => {
    const area = draftEl();
    const ok = state.addMention(
      area.selectionStart ?? 0,
      area.selectionEnd ?? 0,
      labelSelect.value,
    );
    setStatus(ok ? "Mention added." : "Select a non-empty span that does not overlap a chip.",
              ok ? "info" : "error");
    renderAll();
  };
}

wire();
renderAll();
