/** Error taxonomy. Config-level mistakes and data-level mistakes get distinct
 * exit codes in the CLI, so every failure mode has its own class. */

export class AdapterError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** A grammatical function or dependency label absent from the mapping table. */
export class UnmappableFunction extends AdapterError {}

/** The dependency and coreference exports disagree about sentence structure. */
export class InconsistentSentenceCount extends AdapterError {}

/** A bracketed discourse tree that cannot be parsed. */
export class MalformedTree extends AdapterError {}

/** A tree leaf with no usable entry in the EDU-to-sentence alignment. */
export class UnalignedEdu extends AdapterError {}

/** A probability table with negative mass or mass not summing to one. */
export class InvalidDistribution extends AdapterError {}

/** Structurally invalid input: bad JSON shapes, labels, or token lines. */
export class SchemaViolation extends AdapterError {}
