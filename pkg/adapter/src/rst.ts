/** Bracketed discourse trees: parse them, label the EDUs, and attach the
 * labels to an annotation record.
 *
 * Tree grammar, whitespace-insensitive:
 *
 *   tree  := leaf | "(" child child* ")"
 *   child := "(" label tree ")"
 *   label := relation "." ("N" | "S")
 *   leaf  := "[" id "]"
 *
 * Every EDU sits directly under exactly one labeled edge, which names the
 * relation governing it and whether it is the nucleus or the satellite. A
 * bare-leaf tree is the degenerate single-EDU document; no relation governs
 * that unit, so it is rendered "span.N".
 */

import { MalformedTree, UnalignedEdu } from "./errors.js";
import { RELATION_LABEL, type AnnotationRecord } from "./schema.js";

export interface Edu {
  id: string;
  label: string;
}

const ROOT_LABEL = "span.N";

type Token =
  | { kind: "open" }
  | { kind: "close" }
  | { kind: "leaf"; id: string }
  | { kind: "word"; text: string };

function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  const pattern = /\s+|\(|\)|\[([^\s()[\]]+)\]|[^\s()[\]]+/gy;
  let pos = 0;
  while (pos < text.length) {
    pattern.lastIndex = pos;
    const match = pattern.exec(text);
    if (match === null || match.index !== pos) {
      throw new MalformedTree(`unreadable tree text at offset ${pos}`);
    }
    const piece = match[0];
    if (!/^\s+$/.test(piece)) {
      if (piece === "(") {
        tokens.push({ kind: "open" });
      } else if (piece === ")") {
        tokens.push({ kind: "close" });
      } else if (match[1] !== undefined) {
        tokens.push({ kind: "leaf", id: match[1] });
      } else {
        tokens.push({ kind: "word", text: piece });
      }
    }
    pos = pattern.lastIndex;
  }
  return tokens;
}

class TreeParser {
  private readonly tokens: Token[];
  private pos = 0;
  readonly edus: Edu[] = [];

  constructor(text: string) {
    this.tokens = tokenize(text);
  }

  private peek(): Token | undefined {
    return this.tokens[this.pos];
  }

  private next(): Token {
    const token = this.tokens[this.pos];
    if (token === undefined) {
      throw new MalformedTree("tree text ended inside a group");
    }
    this.pos += 1;
    return token;
  }

  parse(): Edu[] {
    if (this.tokens.length === 0) {
      throw new MalformedTree("empty tree text");
    }
    this.parseTree(ROOT_LABEL);
    if (this.pos !== this.tokens.length) {
      throw new MalformedTree("trailing content after the tree");
    }
    const seen = new Set<string>();
    for (const edu of this.edus) {
      if (seen.has(edu.id)) {
        throw new MalformedTree(`duplicate EDU id ${JSON.stringify(edu.id)}`);
      }
      seen.add(edu.id);
    }
    return this.edus;
  }

  private parseTree(label: string): void {
    const token = this.next();
    if (token.kind === "leaf") {
      this.edus.push({ id: token.id, label });
      return;
    }
    if (token.kind !== "open") {
      throw new MalformedTree("expected a leaf or an opening parenthesis");
    }
    let children = 0;
    while (true) {
      const ahead = this.peek();
      if (ahead === undefined) {
        throw new MalformedTree("tree text ended inside a group");
      }
      if (ahead.kind === "close") {
        this.next();
        break;
      }
      this.parseChild();
      children += 1;
    }
    if (children === 0) {
      throw new MalformedTree("group with no children");
    }
  }

  private parseChild(): void {
    const open = this.next();
    if (open.kind !== "open") {
      throw new MalformedTree("expected an opening parenthesis before a labeled child");
    }
    const label = this.next();
    if (label.kind !== "word" || !RELATION_LABEL.test(label.text)) {
      throw new MalformedTree("each child needs a relation label with a .N or .S suffix");
    }
    this.parseTree(label.text);
    const close = this.next();
    if (close.kind !== "close") {
      throw new MalformedTree("unbalanced parentheses around a labeled child");
    }
  }
}

/** Parse a bracketed tree into its EDUs, left to right, each carrying the
 * label of the relation edge directly above it. */
export function parseRstTree(text: string): Edu[] {
  return new TreeParser(text).parse();
}

/**
 * Attach discourse structure to a converted record.
 *
 * The alignment maps EDU ids to sentence indices. The unit sequence is the
 * tree's leaves in text order; each mention inherits, in that same order,
 * the labels of every unit aligned to its sentence. Returns a new record.
 */
export function convertRst(
  record: AnnotationRecord,
  treeText: string,
  alignment: Record<string, number>,
): AnnotationRecord {
  const edus = parseRstTree(treeText);
  const perSentence: string[][] = Array.from({ length: record.n_sentences }, () => []);
  const sequence: string[] = [];
  for (const edu of edus) {
    const sentence = alignment[edu.id];
    if (sentence === undefined) {
      throw new UnalignedEdu(`EDU ${JSON.stringify(edu.id)} has no alignment entry`);
    }
    if (!Number.isInteger(sentence) || sentence < 0 || sentence >= record.n_sentences) {
      throw new UnalignedEdu(
        `EDU ${JSON.stringify(edu.id)} aligned to sentence ${sentence}, outside the ${record.n_sentences}-sentence document`,
      );
    }
    perSentence[sentence].push(edu.label);
    sequence.push(edu.label);
  }
  return {
    ...record,
    mentions: record.mentions.map((m) => ({ ...m, relations: [...perSentence[m.sentence_index]] })),
    edu_sequence: sequence,
  };
}
