export {
  AdapterError,
  InconsistentSentenceCount,
  InvalidDistribution,
  MalformedTree,
  SchemaViolation,
  UnalignedEdu,
  UnmappableFunction,
} from "./errors.js";
export {
  RELATION_LABEL,
  checkRelationLabel,
  renderJson,
  type AnnotationRecord,
  type Mention,
  type Role,
} from "./schema.js";
export { parseConll, type ConllSentence, type ConllToken } from "./conll.js";
export { DEFAULT_MAPPING, mergeMapping, resolveRole } from "./mapping.js";
export {
  convertDependency,
  parseCorefExport,
  type CorefChain,
  type CorefExport,
  type CorefMention,
} from "./convert.js";
export { convertRst, parseRstTree, type Edu } from "./rst.js";
export { Categorical, Rng } from "./rng.js";
export {
  charChain,
  generateCorpus,
  generateDocument,
  parseAuthorSignature,
  parseCorpusSpec,
  type AuthorSignature,
  type CorpusSpec,
} from "./synth.js";
export { main } from "./cli.js";
