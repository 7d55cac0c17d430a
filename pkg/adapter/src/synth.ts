/** Synthetic annotated corpora with controllable per-author signatures.
 *
 * Mirrors the attribution package's generator contract: each signature
 * drives a char-bigram chain for the text, a role-transition chain for
 * entity mention walks, and a relation-label chain for mention relations
 * and the EDU stream. Signatures can share the char chain so that only
 * discourse structure separates the authors.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { InvalidDistribution, SchemaViolation } from "./errors.js";
import { Categorical, Rng } from "./rng.js";
import { checkRelationLabel, renderJson, type AnnotationRecord, type Mention, type Role } from "./schema.js";

// the 12 transitions whose first role is present; walks only emit roles
// at mentioned sentences, so absence-first pairs cannot be generated
const ROLE_PAIR = /^[sox][sox-]$/;

export interface AuthorSignature {
  name: string;
  charAlphabet: string;
  charSeed: number;
  sentencesPerDoc: number;
  entitiesPerDoc: number;
  reentryProb: number;
  wordsPerSentence: number | null;
  grTransitions: Record<string, number> | null;
  rstRelations: Record<string, number> | null;
  rstTransition: Record<string, Record<string, number>> | null;
}

export interface CorpusSpec {
  seed: number;
  docsPerAuthor: number;
  wordsPerDoc: number;
  authors: AuthorSignature[];
  charIdentical: boolean;
}

function checkDistribution(name: string, dist: Record<string, number>): void {
  const values = Object.values(dist);
  if (values.length === 0) {
    throw new InvalidDistribution(`${name}: empty distribution`);
  }
  if (values.some((v) => typeof v !== "number" || !Number.isFinite(v))) {
    throw new InvalidDistribution(`${name}: probabilities must be finite numbers`);
  }
  if (values.some((v) => v < 0)) {
    throw new InvalidDistribution(`${name}: negative probability`);
  }
  const total = values.reduce((acc, v) => acc + v, 0);
  if (Math.abs(total - 1.0) > 1e-9) {
    throw new InvalidDistribution(`${name}: probabilities sum to ${total.toFixed(12)}`);
  }
}

function asObject(value: unknown, what: string): Record<string, unknown> {
  if (value === null || typeof value !== "object" || Array.isArray(value)) {
    throw new SchemaViolation(`${what} must be a JSON object`);
  }
  return value as Record<string, unknown>;
}

function asDistribution(value: unknown, what: string): Record<string, number> {
  const raw = asObject(value, what);
  const out: Record<string, number> = {};
  for (const [key, v] of Object.entries(raw)) {
    if (typeof v !== "number") {
      throw new SchemaViolation(`${what}[${JSON.stringify(key)}] must be a number`);
    }
    out[key] = v;
  }
  return out;
}

function requireInt(value: unknown, what: string): number {
  if (typeof value !== "number" || !Number.isInteger(value)) {
    throw new SchemaViolation(`${what} must be an integer`);
  }
  return value;
}

/** Validate one author signature from parsed JSON. */
export function parseAuthorSignature(payload: unknown): AuthorSignature {
  const raw = asObject(payload, "author signature");
  if (typeof raw.name !== "string" || raw.name === "") {
    throw new SchemaViolation("author signature needs a non-empty name");
  }
  const name = raw.name;
  const char = asObject(raw.char, `${name}.char`);
  if (typeof char.alphabet !== "string") {
    throw new SchemaViolation(`${name}: char.alphabet must be a string`);
  }
  const sig: AuthorSignature = {
    name,
    charAlphabet: char.alphabet,
    charSeed: requireInt(char.seed, `${name}.char.seed`),
    sentencesPerDoc: requireInt(raw.sentences_per_doc, `${name}.sentences_per_doc`),
    entitiesPerDoc: requireInt(raw.entities_per_doc, `${name}.entities_per_doc`),
    reentryProb: raw.reentry_prob === undefined ? 0.5 : (raw.reentry_prob as number),
    wordsPerSentence:
      raw.words_per_sentence === undefined
        ? null
        : requireInt(raw.words_per_sentence, `${name}.words_per_sentence`),
    grTransitions:
      raw.gr_transitions === undefined || raw.gr_transitions === null
        ? null
        : asDistribution(raw.gr_transitions, `${name}.gr_transitions`),
    rstRelations:
      raw.rst_relations === undefined || raw.rst_relations === null
        ? null
        : asDistribution(raw.rst_relations, `${name}.rst_relations`),
    rstTransition: null,
  };
  if (raw.rst_transition !== undefined && raw.rst_transition !== null) {
    const rows = asObject(raw.rst_transition, `${name}.rst_transition`);
    const parsed: Record<string, Record<string, number>> = {};
    for (const [prev, row] of Object.entries(rows)) {
      parsed[prev] = asDistribution(row, `${name}.rst_transition[${prev}]`);
    }
    sig.rstTransition = parsed;
  }
  if (typeof sig.reentryProb !== "number" || Number.isNaN(sig.reentryProb)) {
    throw new SchemaViolation(`${name}: reentry_prob must be a number`);
  }

  if (!sig.charAlphabet.includes(" ") || new Set(sig.charAlphabet).size < 3) {
    throw new SchemaViolation(`${name}: alphabet needs a space and >= 2 letters`);
  }
  if (sig.sentencesPerDoc < 2 || sig.entitiesPerDoc < 1) {
    throw new SchemaViolation(`${name}: too few sentences or entities`);
  }
  if (sig.reentryProb < 0 || sig.reentryProb > 1) {
    throw new SchemaViolation(`${name}: reentry_prob outside [0, 1]`);
  }
  if (sig.grTransitions !== null) {
    const unknown = Object.keys(sig.grTransitions).filter((pair) => !ROLE_PAIR.test(pair));
    if (unknown.length > 0) {
      throw new SchemaViolation(`${name}: unknown role transitions ${JSON.stringify(unknown.sort())}`);
    }
    checkDistribution(`${name}.gr_transitions`, sig.grTransitions);
  }
  if (sig.rstRelations !== null) {
    for (const label of Object.keys(sig.rstRelations)) {
      checkRelationLabel(label, `${name}.rst_relations`);
    }
    checkDistribution(`${name}.rst_relations`, sig.rstRelations);
  }
  if (sig.rstTransition !== null) {
    if (sig.rstRelations === null) {
      throw new SchemaViolation(`${name}: rst_transition requires rst_relations`);
    }
    for (const [prev, row] of Object.entries(sig.rstTransition)) {
      checkRelationLabel(prev, `${name}.rst_transition`);
      for (const label of Object.keys(row)) {
        checkRelationLabel(label, `${name}.rst_transition[${prev}]`);
      }
      checkDistribution(`${name}.rst_transition[${prev}]`, row);
    }
  }
  return sig;
}

/** Validate a corpus spec from parsed JSON. */
export function parseCorpusSpec(payload: unknown): CorpusSpec {
  const raw = asObject(payload, "corpus spec");
  if (!Array.isArray(raw.authors)) {
    throw new SchemaViolation("corpus spec needs an authors array");
  }
  const spec: CorpusSpec = {
    seed: raw.seed === undefined ? 0 : requireInt(raw.seed, "seed"),
    docsPerAuthor: requireInt(raw.docs_per_author, "docs_per_author"),
    wordsPerDoc: requireInt(raw.words_per_doc, "words_per_doc"),
    authors: raw.authors.map(parseAuthorSignature),
    charIdentical: Boolean(raw.char_identical),
  };
  if (spec.authors.length < 2) {
    throw new SchemaViolation("corpus spec needs >= 2 authors");
  }
  if (spec.charIdentical) {
    const first = spec.authors[0];
    for (const sig of spec.authors.slice(1)) {
      sig.charAlphabet = first.charAlphabet;
      sig.charSeed = first.charSeed;
    }
  }
  return spec;
}

/** Row-stochastic bigram transition matrix; squaring the raw draws sharpens
 * the rows so different seeds give visibly different chains. Space never
 * follows space. */
export function charChain(alphabet: string, seed: number): number[][] {
  const rng = new Rng(seed);
  const n = alphabet.length;
  const space = alphabet.indexOf(" ");
  const rows: number[][] = [];
  for (let i = 0; i < n; i++) {
    const row: number[] = [];
    for (let j = 0; j < n; j++) {
      row.push(rng.random() ** 2);
    }
    rows.push(row);
  }
  rows[space][space] = 0;
  return rows.map((row) => {
    const total = row.reduce((acc, v) => acc + v, 0);
    return row.map((v) => v / total);
  });
}

function sampleWords(rng: Rng, chain: number[][], alphabet: string, count: number): string[] {
  const space = alphabet.indexOf(" ");
  const cum = chain.map((row) => {
    let acc = 0;
    return row.map((v) => (acc += v));
  });
  const pick = (state: number): number => {
    const u = rng.random();
    const row = cum[state];
    for (let j = 0; j < row.length; j++) {
      if (u < row[j]) {
        return j;
      }
    }
    return row.length - 1;
  };
  let state = space;
  const words: string[] = [];
  let word: string[] = [];
  while (words.length < count) {
    const nxt = pick(state);
    if (nxt === space) {
      if (word.length >= 2) {
        // a shorter word pends until it grows
        words.push(word.join(""));
        word = [];
      }
      state = space;
      continue;
    }
    word.push(alphabet[nxt]);
    state = nxt;
    if (word.length >= 12) {
      words.push(word.join(""));
      word = [];
      state = space;
    }
  }
  return words;
}

interface RoleSamplers {
  first: Categorical;
  next: Record<string, Categorical>;
}

function roleSamplers(sig: AuthorSignature): RoleSamplers {
  if (sig.grTransitions === null) {
    const uniform = { s: 1 / 3, o: 1 / 3, x: 1 / 3 };
    return {
      first: new Categorical(uniform),
      next: { s: new Categorical(uniform), o: new Categorical(uniform), x: new Categorical(uniform) },
    };
  }
  const first: Record<string, number> = {};
  const rows: Record<string, Record<string, number>> = {};
  for (const [pair, p] of Object.entries(sig.grTransitions)) {
    first[pair[0]] = (first[pair[0]] ?? 0) + p;
    // absence is governed by reentry_prob, so "-" never enters the walk
    // state: pairs ending in "-" shape the marginal only
    if (pair[1] !== "-") {
      (rows[pair[0]] ??= {})[pair[1]] = p;
    }
  }
  const firstTotal = Object.values(first).reduce((acc, v) => acc + v, 0);
  for (const role of Object.keys(first)) {
    first[role] /= firstTotal;
  }
  const next: Record<string, Categorical> = {};
  for (const [role, row] of Object.entries(rows)) {
    const rowTotal = Object.values(row).reduce((acc, v) => acc + v, 0);
    const normalized: Record<string, number> = {};
    for (const [k, v] of Object.entries(row)) {
      normalized[k] = v / rowTotal;
    }
    next[role] = new Categorical(normalized);
  }
  return { first: new Categorical(first), next };
}

/** One document: text words from the char chain, entity mention walks from
 * the role chain, relations and the EDU stream from the label chain. */
export function generateDocument(
  sig: AuthorSignature,
  wordsPerDoc: number,
  rng: Rng,
  docId: string,
): { text: string; record: AnnotationRecord } {
  const nSent = sig.sentencesPerDoc;
  const wps = sig.wordsPerSentence ?? Math.max(1, Math.floor(wordsPerDoc / nSent));
  const chain = charChain(sig.charAlphabet, sig.charSeed);
  const words = sampleWords(rng, chain, sig.charAlphabet, nSent * wps);
  const text = words.join(" ");

  const roles = roleSamplers(sig);
  const initialRel = sig.rstRelations === null ? null : new Categorical(sig.rstRelations);
  const relRows: Record<string, Categorical> = {};
  for (const [prev, row] of Object.entries(sig.rstTransition ?? {})) {
    relRows[prev] = new Categorical(row);
  }
  const sampleRelation = (prev: string | null): string[] => {
    if (initialRel === null) {
      return [];
    }
    const sampler = prev !== null ? relRows[prev] ?? initialRel : initialRel;
    return [sampler.sample(rng)];
  };

  const keyed: { sentence: number; entity: number; mention: Mention }[] = [];
  for (let e = 0; e < sig.entitiesPerDoc; e++) {
    const debut = rng.int(Math.max(1, nSent - 1));
    let role = roles.first.sample(rng) as Role;
    let prevRel: string | null = null;
    let rels = sampleRelation(prevRel);
    prevRel = rels.length > 0 ? rels[0] : null;
    keyed.push({
      sentence: debut,
      entity: e,
      mention: { entity_id: `e${e}`, sentence_index: debut, role, relations: rels },
    });
    for (let s = debut + 1; s < nSent; s++) {
      if (rng.random() >= sig.reentryProb) {
        continue;
      }
      const sampler = roles.next[role] ?? roles.first;
      role = sampler.sample(rng) as Role;
      rels = sampleRelation(prevRel);
      prevRel = rels.length > 0 ? rels[0] : prevRel;
      keyed.push({
        sentence: s,
        entity: e,
        mention: { entity_id: `e${e}`, sentence_index: s, role, relations: rels },
      });
    }
  }
  keyed.sort((a, b) => a.sentence - b.sentence || a.entity - b.entity);

  let eduSequence: string[] | null = null;
  if (initialRel !== null) {
    eduSequence = [];
    let prev: string | null = null;
    for (let i = 0; i < nSent; i++) {
      const sampler: Categorical = prev !== null ? relRows[prev] ?? initialRel : initialRel;
      const label: string = sampler.sample(rng);
      eduSequence.push(label);
      prev = label;
    }
  }
  return {
    text,
    record: {
      doc_id: docId,
      n_sentences: nSent,
      mentions: keyed.map((k) => k.mention),
      edu_sequence: eduSequence,
    },
  };
}

interface ManifestEntry {
  id: string;
  author: string;
  text_path: string;
  annotation_path: string;
}

/** Write texts, annotation records, and a manifest; returns the manifest
 * path. Identical spec and seed reproduce identical bytes. */
export function generateCorpus(spec: CorpusSpec, outDir: string): string {
  fs.mkdirSync(path.join(outDir, "texts"), { recursive: true });
  fs.mkdirSync(path.join(outDir, "annotations"), { recursive: true });
  const documents: ManifestEntry[] = [];
  for (let aIdx = 0; aIdx < spec.authors.length; aIdx++) {
    const sig = spec.authors[aIdx];
    for (let d = 0; d < spec.docsPerAuthor; d++) {
      const rng = new Rng(spec.seed, aIdx, d);
      const docId = `${sig.name}-${String(d).padStart(3, "0")}`;
      const { text, record } = generateDocument(sig, spec.wordsPerDoc, rng, docId);
      fs.writeFileSync(path.join(outDir, "texts", `${docId}.txt`), text, "utf8");
      fs.writeFileSync(path.join(outDir, "annotations", `${docId}.json`), renderJson(record), "utf8");
      documents.push({
        id: docId,
        author: sig.name,
        text_path: `texts/${docId}.txt`,
        annotation_path: `annotations/${docId}.json`,
      });
    }
  }
  const manifest = path.join(outDir, "manifest.json");
  fs.writeFileSync(manifest, renderJson({ documents }), "utf8");
  return manifest;
}
