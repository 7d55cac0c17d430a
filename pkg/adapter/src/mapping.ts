/** Grammatical-function to grid-role resolution. */

import { SchemaViolation, UnmappableFunction } from "./errors.js";
import type { Role } from "./schema.js";

const SUBJECT_LABELS = ["subject", "nsubj", "csubj", "nsubjpass", "csubjpass"];

const OBJECT_LABELS = ["object", "obj", "dobj", "iobj"];

// everything else in the usual universal and legacy Stanford inventories
const OTHER_LABELS = [
  "other",
  "acl", "advcl", "advmod", "amod", "appos", "attr", "aux", "auxpass",
  "case", "cc", "ccomp", "clf", "compound", "conj", "cop", "dep", "det",
  "discourse", "dislocated", "expl", "fixed", "flat", "goeswith", "list",
  "mark", "neg", "nmod", "num", "nummod", "obl", "orphan", "parataxis",
  "pcomp", "pobj", "poss", "prep", "prt", "punct", "quantmod", "rcmod",
  "reparandum", "root", "tmod", "vocative", "xcomp",
];

function buildDefaultMapping(): Record<string, Role> {
  const table: Record<string, Role> = {};
  for (const label of SUBJECT_LABELS) table[label] = "s";
  for (const label of OBJECT_LABELS) table[label] = "o";
  for (const label of OTHER_LABELS) table[label] = "x";
  return table;
}

/** Default label-to-role table; merge user entries over it to customize. */
export const DEFAULT_MAPPING: Record<string, Role> = buildDefaultMapping();

/** Check a user-supplied mapping table and merge it over the default one. */
export function mergeMapping(overrides: unknown): Record<string, Role> {
  if (overrides === null || typeof overrides !== "object" || Array.isArray(overrides)) {
    throw new SchemaViolation("mapping file must be a JSON object of label -> role");
  }
  const merged: Record<string, Role> = { ...DEFAULT_MAPPING };
  for (const [label, role] of Object.entries(overrides as Record<string, unknown>)) {
    if (role !== "s" && role !== "o" && role !== "x") {
      throw new SchemaViolation(`mapping for ${JSON.stringify(label)} must be "s", "o", or "x"`);
    }
    merged[label.toLowerCase()] = role;
  }
  return merged;
}

/**
 * Map a grammatical function or dependency label to a grid role.
 *
 * Lookup is case-insensitive and falls back to the bare label before a ":"
 * subtype (so "nsubj:pass" resolves through "nsubj"). Labels absent from
 * the table raise instead of guessing a role.
 */
export function resolveRole(label: string, mapping: Record<string, Role> = DEFAULT_MAPPING): Role {
  const lower = label.toLowerCase();
  if (lower in mapping) {
    return mapping[lower];
  }
  const bare = lower.split(":", 1)[0];
  if (bare in mapping) {
    return mapping[bare];
  }
  throw new UnmappableFunction(`no role mapping for grammatical function ${JSON.stringify(label)}`);
}
