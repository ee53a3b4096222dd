/** Wire types for the gateway HTTP API. All spans are UTF-8 byte offsets. */

export interface WireMention {
  surface: string;
  label: string;
  start: number;
  end: number;
  source: string;
  placeholder: string | null;
}

export interface MaskResponse {
  masked_text: string;
  mentions: WireMention[];
  vault_delta: VaultEntry[];
  mask_hash: string;
}

export interface VaultEntry {
  placeholder: string;
  surface: string;
  label: string;
}

export interface VaultSnapshot {
  session_id: string;
  entries: VaultEntry[];
  counters: Record<string, number>;
}

export interface MentionEdit {
  action: "add" | "remove" | "relabel";
  start: number;
  end: number;
  label?: string;
}

export interface DispatchResponse {
  masked_reply: string;
  reply: string;
  unresolved: string[];
}

export interface TranscriptRecord {
  prompt: string;
  masked_prompt: string;
  masked_reply: string;
  reply: string;
  unresolved: string[];
  started_at: string;
  finished_at: string;
}

export const ENTITY_LABELS = [
  "PERSON",
  "CASE_NUMBER",
  "DATE_OF_BIRTH",
  "ADDRESS",
  "COMPANY",
  "TAX_ID",
  "LOCATION",
  "DATE",
  "LAW_OFFICE",
  "NATIONALITY",
] as const;

export type EntityLabel = (typeof ENTITY_LABELS)[number];
