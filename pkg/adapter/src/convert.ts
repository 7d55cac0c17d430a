/** Dependency plus coreference exports to annotation records. */

import { InconsistentSentenceCount, SchemaViolation } from "./errors.js";
import { parseConll, type ConllSentence } from "./conll.js";
import { DEFAULT_MAPPING, resolveRole } from "./mapping.js";
import type { AnnotationRecord, Mention, Role } from "./schema.js";

export interface CorefMention {
  sentence: number;
  head: number;
  function?: string;
}

export interface CorefChain {
  id: string;
  mentions: CorefMention[];
}

export interface CorefExport {
  doc_id: string;
  n_sentences?: number;
  chains: CorefChain[];
}

function isInt(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value);
}

/** Validate the shape of a parsed coreference export. */
export function parseCorefExport(payload: unknown): CorefExport {
  if (payload === null || typeof payload !== "object" || Array.isArray(payload)) {
    throw new SchemaViolation("coreference export must be a JSON object");
  }
  const raw = payload as Record<string, unknown>;
  if (typeof raw.doc_id !== "string" || raw.doc_id === "") {
    throw new SchemaViolation("coreference export needs a non-empty doc_id");
  }
  if (raw.n_sentences !== undefined && (!isInt(raw.n_sentences) || raw.n_sentences < 0)) {
    throw new SchemaViolation("n_sentences must be a non-negative integer");
  }
  if (!Array.isArray(raw.chains)) {
    throw new SchemaViolation("coreference export needs a chains array");
  }
  const chains: CorefChain[] = [];
  for (const entry of raw.chains) {
    if (entry === null || typeof entry !== "object" || Array.isArray(entry)) {
      throw new SchemaViolation("each chain must be a JSON object");
    }
    const chain = entry as Record<string, unknown>;
    if (typeof chain.id !== "string" || chain.id === "") {
      throw new SchemaViolation("each chain needs a non-empty string id");
    }
    if (!Array.isArray(chain.mentions) || chain.mentions.length === 0) {
      throw new SchemaViolation(`chain ${JSON.stringify(chain.id)} needs a non-empty mentions array`);
    }
    const mentions: CorefMention[] = [];
    for (const item of chain.mentions) {
      if (item === null || typeof item !== "object" || Array.isArray(item)) {
        throw new SchemaViolation(`chain ${JSON.stringify(chain.id)}: each mention must be a JSON object`);
      }
      const mention = item as Record<string, unknown>;
      if (!isInt(mention.sentence) || !isInt(mention.head)) {
        throw new SchemaViolation(
          `chain ${JSON.stringify(chain.id)}: mentions need integer sentence and head fields`,
        );
      }
      if (mention.function !== undefined && typeof mention.function !== "string") {
        throw new SchemaViolation(`chain ${JSON.stringify(chain.id)}: function must be a string`);
      }
      mentions.push({
        sentence: mention.sentence,
        head: mention.head,
        ...(mention.function !== undefined ? { function: mention.function } : {}),
      });
    }
    chains.push({ id: chain.id, mentions });
  }
  return {
    doc_id: raw.doc_id,
    ...(raw.n_sentences !== undefined ? { n_sentences: raw.n_sentences as number } : {}),
    chains,
  };
}

function headDeprel(sentence: ConllSentence, head: number, chainId: string, index: number): string {
  const token = sentence.find((t) => t.id === head);
  if (token === undefined) {
    throw new SchemaViolation(
      `chain ${JSON.stringify(chainId)}: head token ${head} not found in sentence ${index}`,
    );
  }
  return token.deprel;
}

/**
 * Convert one document's parser exports into an annotation record.
 *
 * Coreference chains become entities. Each mention's grammatical function,
 * taken from the export when present and otherwise from the dependency
 * label of its head token, is mapped to a grid role. The sentence count of
 * the dependency export is authoritative; a disagreeing coreference export
 * is rejected rather than silently clipped. Relations and the unit
 * sequence stay empty until convertRst adds them.
 */
export function convertDependency(
  conllText: string,
  coref: CorefExport,
  options: { mapping?: Record<string, Role> } = {},
): AnnotationRecord {
  const sentences = parseConll(conllText);
  if (coref.n_sentences !== undefined && coref.n_sentences !== sentences.length) {
    throw new InconsistentSentenceCount(
      `coreference export declares ${coref.n_sentences} sentences but the dependency export has ${sentences.length}`,
    );
  }
  const mapping = options.mapping ?? DEFAULT_MAPPING;
  const mentions: Mention[] = [];
  for (const chain of coref.chains) {
    for (const mention of chain.mentions) {
      if (mention.sentence < 0 || mention.sentence >= sentences.length) {
        throw new InconsistentSentenceCount(
          `chain ${JSON.stringify(chain.id)}: mention in sentence ${mention.sentence} but the dependency export has ${sentences.length} sentences`,
        );
      }
      const label =
        mention.function ?? headDeprel(sentences[mention.sentence], mention.head, chain.id, mention.sentence);
      mentions.push({
        entity_id: chain.id,
        sentence_index: mention.sentence,
        role: resolveRole(label, mapping),
        relations: [],
      });
    }
  }
  mentions.sort(
    (a, b) =>
      a.sentence_index - b.sentence_index ||
      (a.entity_id < b.entity_id ? -1 : a.entity_id > b.entity_id ? 1 : 0),
  );
  return {
    doc_id: coref.doc_id,
    n_sentences: sentences.length,
    mentions,
    edu_sequence: null,
  };
}
