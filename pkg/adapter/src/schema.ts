/** The annotation-record JSON contract consumed by the attribution package. */

import { SchemaViolation } from "./errors.js";

export type Role = "s" | "o" | "x";

export interface Mention {
  entity_id: string;
  sentence_index: number;
  role: Role;
  relations: string[];
}

export interface AnnotationRecord {
  doc_id: string;
  n_sentences: number;
  mentions: Mention[];
  edu_sequence: string[] | null;
}

/** Relation name plus the nuclearity of the unit it labels, e.g. "elaboration.N". */
export const RELATION_LABEL = /^[a-z][a-z0-9_-]*\.(N|S)$/;

export function checkRelationLabel(label: string, context: string): string {
  if (!RELATION_LABEL.test(label)) {
    throw new SchemaViolation(
      `${context}: bad relation label ${JSON.stringify(label)}, expected a lowercase name with a .N or .S suffix`,
    );
  }
  return label;
}

function sortKeysDeep(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeysDeep);
  }
  if (value !== null && typeof value === "object") {
    const source = value as Record<string, unknown>;
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(source).sort()) {
      out[key] = sortKeysDeep(source[key]);
    }
    return out;
  }
  return value;
}

/** Canonical serialization: sorted keys, one-space indent, trailing newline. */
export function renderJson(value: unknown): string {
  return JSON.stringify(sortKeysDeep(value), null, 1) + "\n";
}
