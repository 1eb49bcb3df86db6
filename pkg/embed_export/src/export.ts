/**
 * The export pipeline: corpus in, embedding file plus sidecar report out.
 *
 * Entities are enumerated in corpus order and encoded in fixed-size
 * batches within a single process, so two runs over the same inputs
 * write identical bytes. Keys follow the shared convention:
 *
 *   abstract:<paper>             caption:<paper>/<figure>
 *   figure:<paper>/<figure>      caption:<paper>/<figure>/<subfigure>
 *   subfigure:<paper>/<figure>/<subfigure>
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { readCorpus, type Paper } from "./corpus.js";
import {
  encodeImage,
  encodeText,
  resolveEncoder,
  TOKEN_LIMIT,
  type HashEncoder,
} from "./encoders.js";
import { encodeEmbeddings, type EmbeddingRecord } from "./format.js";
import { writeReport, type ExportReport, type SkippedEntity } from "./report.js";

export const ENTITY_KINDS = ["abstract", "caption", "figure", "subfigure"] as const;
export type EntityKind = (typeof ENTITY_KINDS)[number];

export interface ExportJob {
  corpusPath: string;
  kinds: EntityKind[];
  encoderId: string;
  outPath: string;
  batchSize?: number;
  mediaDir?: string;
}

interface Entity {
  kind: EntityKind;
  key: string;
  text?: string;
  mediaPath?: string;
}

const MEDIA_EXTENSIONS = [".png", ".jpg", ".jpeg"];

function findMedia(dir: string, relStem: string): string | undefined {
  for (const ext of MEDIA_EXTENSIONS) {
    const candidate = join(dir, relStem + ext);
    if (existsSync(candidate)) {
      return candidate;
    }
  }
  return undefined;
}

function enumerateEntities(papers: Paper[], kinds: Set<EntityKind>, mediaDir?: string): Entity[] {
  const entities: Entity[] = [];
  for (const paper of papers) {
    if (kinds.has("abstract")) {
      entities.push({ kind: "abstract", key: `abstract:${paper.paper_id}`, text: paper.abstract });
    }
    for (const fig of paper.figures) {
      const figRel = `${paper.paper_id}/${fig.figure_id}`;
      if (kinds.has("caption")) {
        entities.push({ kind: "caption", key: `caption:${figRel}`, text: fig.caption });
      }
      if (kinds.has("figure")) {
        entities.push({
          kind: "figure",
          key: `figure:${figRel}`,
          mediaPath: mediaDir === undefined ? undefined : findMedia(mediaDir, figRel),
        });
      }
      for (const sub of fig.subfigures) {
        const subRel = `${figRel}/${sub.subfigure_id}`;
        if (kinds.has("caption")) {
          entities.push({ kind: "caption", key: `caption:${subRel}`, text: sub.caption });
        }
        if (kinds.has("subfigure")) {
          entities.push({
            kind: "subfigure",
            key: `subfigure:${subRel}`,
            mediaPath: mediaDir === undefined ? undefined : findMedia(mediaDir, subRel),
          });
        }
      }
    }
  }
  return entities;
}

interface Encoded {
  record?: EmbeddingRecord;
  skipped?: SkippedEntity;
  truncated: boolean;
}

function encodeEntity(enc: HashEncoder, entity: Entity): Encoded {
  if (entity.text !== undefined) {
    const res = encodeText(enc, entity.text);
    if (res === null) {
      return { skipped: { key: entity.key, reason: "empty text after cleaning" }, truncated: false };
    }
    return { record: { key: entity.key, vector: res.vector }, truncated: res.truncated };
  }
  if (entity.mediaPath === undefined) {
    return { skipped: { key: entity.key, reason: "missing media file" }, truncated: false };
  }
  const vector = encodeImage(enc, readFileSync(entity.mediaPath));
  if (vector === null) {
    return { skipped: { key: entity.key, reason: "empty media file" }, truncated: false };
  }
  return { record: { key: entity.key, vector }, truncated: false };
}

export interface ExportResult {
  outPath: string;
  reportPath: string;
  report: ExportReport;
}

/** Run a full export job and write both the embedding file and its report. */
export function exportEmbeddings(job: ExportJob): ExportResult {
  if (job.kinds.length === 0) {
    throw new Error("at least one entity kind is required");
  }
  for (const kind of job.kinds) {
    if (!ENTITY_KINDS.includes(kind)) {
      throw new Error(`unknown entity kind '${kind}'`);
    }
  }
  const batchSize = job.batchSize ?? 32;
  if (!Number.isInteger(batchSize) || batchSize <= 0) {
    throw new Error(`batch size must be a positive integer, got ${batchSize}`);
  }
  const enc = resolveEncoder(job.encoderId);
  const papers = readCorpus(job.corpusPath);
  const kinds = new Set(job.kinds);
  const entities = enumerateEntities(papers, kinds, job.mediaDir);

  const records: EmbeddingRecord[] = [];
  const skipped: SkippedEntity[] = [];
  let truncated = 0;
  for (let start = 0; start < entities.length; start += batchSize) {
    const batch = entities.slice(start, start + batchSize);
    for (const entity of batch) {
      const result = encodeEntity(enc, entity);
      if (result.truncated) {
        truncated += 1;
      }
      if (result.skipped !== undefined) {
        skipped.push(result.skipped);
        continue;
      }
      const record = result.record as EmbeddingRecord;
      if (record.vector.length !== enc.dim) {
        throw new Error(
          `encoder dim drift at ${record.key}: got ${record.vector.length}, expected ${enc.dim}`,
        );
      }
      records.push(record);
    }
  }

  writeFileSync(job.outPath, encodeEmbeddings(enc.dim, records));
  const report: ExportReport = {
    encoder: enc.id,
    dim: enc.dim,
    kinds: [...job.kinds],
    records: records.length,
    skipped,
    token_limit: TOKEN_LIMIT,
    truncated,
  };
  const reportFile = writeReport(job.outPath, report);
  return { outPath: job.outPath, reportPath: reportFile, report };
}
