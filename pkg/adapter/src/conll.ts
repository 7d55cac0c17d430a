/** Minimal reader for CoNLL-style dependency exports. */

import { SchemaViolation } from "./errors.js";

export interface ConllToken {
  id: number;
  form: string;
  deprel: string;
}

export type ConllSentence = ConllToken[];

/**
 * Parse a tab-separated dependency export into sentences of tokens.
 *
 * Sentences are separated by blank lines and `#` lines are comments. Full
 * ten-column rows read DEPREL from column eight; narrower exports with at
 * least three columns read it from the last column. Multiword ranges
 * ("1-2") and empty nodes ("1.1") are skipped.
 */
export function parseConll(text: string): ConllSentence[] {
  const sentences: ConllSentence[] = [];
  let current: ConllSentence = [];
  const flush = () => {
    if (current.length > 0) {
      sentences.push(current);
      current = [];
    }
  };
  let lineno = 0;
  for (const raw of text.split(/\r?\n/)) {
    lineno += 1;
    const line = raw.replace(/\s+$/, "");
    if (line === "") {
      flush();
      continue;
    }
    if (line.startsWith("#")) {
      continue;
    }
    const cols = line.includes("\t") ? line.split("\t") : line.split(/\s+/);
    if (cols.length < 3) {
      throw new SchemaViolation(`line ${lineno}: expected at least 3 columns, got ${cols.length}`);
    }
    if (!/^\d+$/.test(cols[0])) {
      // multiword range or empty node: carries no dependency of its own
      continue;
    }
    const deprel = cols.length >= 8 ? cols[7] : cols[cols.length - 1];
    current.push({ id: Number(cols[0]), form: cols[1], deprel });
  }
  flush();
  if (sentences.length === 0) {
    throw new SchemaViolation("dependency export contains no sentences");
  }
  return sentences;
}
