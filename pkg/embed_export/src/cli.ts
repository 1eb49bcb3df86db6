#!/usr/bin/env node
/**
 * Command-line front end.
 *
 * Usage:
 *   embed-export --corpus corpus.jsonl --kinds abstract,caption \
 *                --encoder hash-256 --out vectors.bin [--media-dir DIR] [--batch-size N]
 */

import { parseArgs } from "node:util";

import { ENTITY_KINDS, exportEmbeddings, type EntityKind } from "./export.js";

const USAGE = `usage: embed-export --corpus FILE --kinds K[,K...] --encoder ID --out FILE
                    [--media-dir DIR] [--batch-size N]

kinds:    ${ENTITY_KINDS.join(", ")}
encoder:  hash-<dim>, e.g. hash-256
`;

function fail(message: string): never {
  process.stderr.write(`embed-export: ${message}\n\n${USAGE}`);
  process.exit(2);
}

export function main(argv: string[]): void {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        corpus: { type: "string" },
        kinds: { type: "string" },
        encoder: { type: "string" },
        out: { type: "string" },
        "media-dir": { type: "string" },
        "batch-size": { type: "string" },
        help: { type: "boolean", short: "h" },
      },
      allowPositionals: false,
    });
  } catch (err) {
    fail((err as Error).message);
  }
  const opts = parsed.values;
  if (opts.help) {
    process.stdout.write(USAGE);
    return;
  }
  for (const required of ["corpus", "kinds", "encoder", "out"] as const) {
    if (opts[required] === undefined) {
      fail(`--${required} is required`);
    }
  }
  const kinds = (opts.kinds as string).split(",").map((k) => k.trim());
  for (const kind of kinds) {
    if (!(ENTITY_KINDS as readonly string[]).includes(kind)) {
      fail(`unknown entity kind '${kind}'`);
    }
  }
  let batchSize: number | undefined;
  if (opts["batch-size"] !== undefined) {
    batchSize = Number(opts["batch-size"]);
    if (!Number.isInteger(batchSize) || batchSize <= 0) {
      fail(`--batch-size must be a positive integer, got '${opts["batch-size"]}'`);
    }
  }

  try {
    const result = exportEmbeddings({
      corpusPath: opts.corpus as string,
      kinds: kinds as EntityKind[],
      encoderId: opts.encoder as string,
      outPath: opts.out as string,
      mediaDir: opts["media-dir"],
      batchSize,
    });
    const { records, skipped, truncated } = result.report;
    process.stdout.write(
      `wrote ${records} records (dim ${result.report.dim}) to ${result.outPath}\n` +
        `report: ${result.reportPath} (${skipped.length} skipped, ${truncated} truncated)\n`,
    );
  } catch (err) {
    process.stderr.write(`embed-export: ${(err as Error).message}\n`);
    process.exit(1);
  }
}

main(process.argv.slice(2));
