#!/usr/bin/env node
/** Command-line front end: convert parser exports, synthesize corpora. */

import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { parseArgs } from "node:util";

import {
  AdapterError,
  InvalidDistribution,
  SchemaViolation,
  UnmappableFunction,
} from "./errors.js";
import { convertDependency, parseCorefExport } from "./convert.js";
import { mergeMapping } from "./mapping.js";
import { convertRst } from "./rst.js";
import { renderJson } from "./schema.js";
import { generateCorpus, parseCorpusSpec } from "./synth.js";

const USAGE = `usage:
  adapter convert --deps FILE --coref FILE [--rst FILE --align FILE] [--mapping FILE] --out FILE
  adapter synth --config FILE --out DIR

convert   dependency + coreference exports (optionally a discourse tree
          and its EDU alignment) -> one annotation record
synth     corpus spec -> texts, annotation records, and a manifest

exit codes: 2 configuration error, 3 data error, 1 anything else`;

function fail(message: string): never {
  throw new ConfigError(message);
}

class ConfigError extends AdapterError {}

function readText(file: string): string {
  if (!fs.existsSync(file)) {
    throw new ConfigError(`file not found: ${file}`);
  }
  return fs.readFileSync(file, "utf8");
}

function readJson(file: string): unknown {
  try {
    return JSON.parse(readText(file));
  } catch (err) {
    if (err instanceof AdapterError) {
      throw err;
    }
    throw new SchemaViolation(`${file}: not valid JSON: ${(err as Error).message}`);
  }
}

function runConvert(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      deps: { type: "string" },
      coref: { type: "string" },
      rst: { type: "string" },
      align: { type: "string" },
      mapping: { type: "string" },
      out: { type: "string" },
    },
    allowPositionals: false,
  });
  if (values.deps === undefined || values.coref === undefined || values.out === undefined) {
    fail("convert needs --deps, --coref, and --out");
  }
  if ((values.rst === undefined) !== (values.align === undefined)) {
    fail("--rst and --align must be given together");
  }
  const mapping = values.mapping === undefined ? undefined : mergeMapping(readJson(values.mapping));
  const coref = parseCorefExport(readJson(values.coref));
  let record = convertDependency(readText(values.deps), coref, { mapping });
  if (values.rst !== undefined && values.align !== undefined) {
    const alignment = readJson(values.align);
    if (alignment === null || typeof alignment !== "object" || Array.isArray(alignment)) {
      throw new SchemaViolation("alignment file must be a JSON object of EDU id -> sentence index");
    }
    record = convertRst(record, readText(values.rst), alignment as Record<string, number>);
  }
  fs.mkdirSync(path.dirname(path.resolve(values.out)), { recursive: true });
  fs.writeFileSync(values.out, renderJson(record), "utf8");
  process.stdout.write(`wrote annotation record ${values.out}\n`);
  return 0;
}

function runSynth(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      config: { type: "string" },
      out: { type: "string" },
    },
    allowPositionals: false,
  });
  if (values.config === undefined || values.out === undefined) {
    fail("synth needs --config and --out");
  }
  const spec = parseCorpusSpec(readJson(values.config));
  const manifest = generateCorpus(spec, values.out);
  process.stdout.write(`wrote corpus manifest ${manifest}\n`);
  return 0;
}

export function main(argv: string[]): number {
  try {
    const command = argv[0];
    if (command === "convert") {
      return runConvert(argv.slice(1));
    }
    if (command === "synth") {
      return runSynth(argv.slice(1));
    }
    process.stderr.write(USAGE + "\n");
    return 2;
  } catch (err) {
    if (err instanceof AdapterError) {
      process.stderr.write(`${err.name}: ${err.message}\n`);
      const config =
        err instanceof ConfigError ||
        err instanceof UnmappableFunction ||
        err instanceof InvalidDistribution;
      return config ? 2 : 3;
    }
    const code = (err as NodeJS.ErrnoException).code;
    if (typeof code === "string" && code.startsWith("ERR_PARSE_ARGS")) {
      // parseArgs rejections (unknown flags, missing values) are usage errors
      process.stderr.write(`${(err as Error).message}\n${USAGE}\n`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  path.resolve(process.argv[1]) === fileURLToPath(import.meta.url);

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
