/** Test utilities, including a bridge that pushes emitted files through the
 * attribution package's public loaders to prove the formats line up. */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

export const FIXTURES = fileURLToPath(new URL("../fixtures", import.meta.url));

export function fixture(name: string): string {
  return path.join(FIXTURES, name);
}

export function readFixture(name: string): string {
  return fs.readFileSync(fixture(name), "utf8");
}

export function tmpdir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}

function python(code: string, ...args: string[]): { status: number | null; stdout: string; stderr: string } {
  return spawnSync("python3", ["-c", code, ...args], { encoding: "utf8" });
}

/** True when the attribution package is importable in this environment. */
export const havePrimary = python("import gridstylo").status === 0;

const GRID_SCRIPT = `
import json, sys
from gridstylo.grid import build_gr_grid, load_annotation
grid = build_gr_grid(load_annotation(sys.argv[1]))
print(json.dumps({
    "entity_ids": grid.entity_ids,
    "cells": [[role.value for role in row] for row in grid.cells],
}))
`;

/** Load a record file with the attribution package and build its role grid. */
export function gridThroughPrimary(recordPath: string): { entity_ids: string[]; cells: string[][] } {
  const run = python(GRID_SCRIPT, recordPath);
  if (run.status !== 0) {
    throw new Error(`grid bridge failed: ${run.stderr}`);
  }
  return JSON.parse(run.stdout);
}

const ROUNDTRIP_SCRIPT = `
import json, sys
from gridstylo.grid import annotation_to_json, load_annotation
print(json.dumps(annotation_to_json(load_annotation(sys.argv[1])), sort_keys=True))
`;

/** Parse a record file with the attribution package and echo it back. */
export function recordThroughPrimary(recordPath: string): unknown {
  const run = python(ROUNDTRIP_SCRIPT, recordPath);
  if (run.status !== 0) {
    throw new Error(`record bridge failed: ${run.stderr}`);
  }
  return JSON.parse(run.stdout);
}

const CORPUS_SCRIPT = `
import sys
from gridstylo.pipeline import load_corpus
items = load_corpus(sys.argv[1], chunk_size=int(sys.argv[2]), require_annotations=True)
print(len(items))
`;

/** Load a generated corpus with the attribution package; returns the number
 * of annotated chunks it produced. */
export function corpusThroughPrimary(manifestPath: string, chunkSize: number): number {
  const run = python(CORPUS_SCRIPT, manifestPath, String(chunkSize));
  if (run.status !== 0) {
    throw new Error(`corpus bridge failed: ${run.stderr}`);
  }
  return Number(run.stdout.trim());
}

/** Recursively collect relative path -> file bytes for a directory tree. */
export function snapshotTree(root: string): Map<string, Buffer> {
  const out = new Map<string, Buffer>();
  const walk = (dir: string) => {
    for (const entry of fs.readdirSync(dir, { withFileTypes: true }).sort((a, b) => (a.name < b.name ? -1 : 1))) {
      const full = path.join(dir, entry.name);
      if (entry.isDirectory()) {
        walk(full);
      } else {
        out.set(path.relative(root, full), fs.readFileSync(full));
      }
    }
  };
  walk(root);
  return out;
}
