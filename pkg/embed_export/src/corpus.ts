/**
 * Minimal corpus reader.
 *
 * Accepts the corpus file layout used across the toolkit: one JSON object
 * per line, or a whole-file JSON array. Only the fields the exporter needs
 * are validated; unknown fields are ignored rather than rejected.
 */

import { readFileSync } from "node:fs";

export interface Subfigure {
  subfigure_id: string;
  caption: string;
}

export interface Figure {
  figure_id: string;
  caption: string;
  subfigures: Subfigure[];
}

export interface Paper {
  paper_id: string;
  abstract: string;
  figures: Figure[];
}

function asString(obj: Record<string, unknown>, field: string, label: string): string {
  const v = obj[field];
  if (typeof v !== "string") {
    throw new Error(`${label}: field '${field}' must be a string`);
  }
  return v;
}

function parsePaper(obj: unknown, label: string): Paper {
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error(`${label}: expected a JSON object`);
  }
  const rec = obj as Record<string, unknown>;
  const paperId = asString(rec, "paper_id", label);
  const abstract = asString(rec, "abstract", label);
  const figures: Figure[] = [];
  const rawFigures = rec.figures ?? [];
  if (!Array.isArray(rawFigures)) {
    throw new Error(`${label}: field 'figures' must be a list`);
  }
  for (const rawFig of rawFigures) {
    if (typeof rawFig !== "object" || rawFig === null) {
      throw new Error(`${label}: figure entries must be objects`);
    }
    const fig = rawFig as Record<string, unknown>;
    const figureId = asString(fig, "figure_id", label);
    const caption = asString(fig, "caption", label);
    const subfigures: Subfigure[] = [];
    const rawSubs = fig.subfigures ?? [];
    if (!Array.isArray(rawSubs)) {
      throw new Error(`${label}: field 'subfigures' must be a list`);
    }
    for (const rawSub of rawSubs) {
      if (typeof rawSub !== "object" || rawSub === null) {
        throw new Error(`${label}: subfigure entries must be objects`);
      }
      const sub = rawSub as Record<string, unknown>;
      subfigures.push({
        subfigure_id: asString(sub, "subfigure_id", label),
        caption: asString(sub, "caption", label),
      });
    }
    figures.push({ figure_id: figureId, caption, subfigures });
  }
  return { paper_id: paperId, abstract, figures };
}

/** Read and validate a corpus file, preserving record order. */
export function readCorpus(path: string): Paper[] {
  const text = readFileSync(path, "utf-8");
  let raw: Array<[string, unknown]>;
  if (text.trimStart().startsWith("[")) {
    const data = JSON.parse(text);
    if (!Array.isArray(data)) {
      throw new Error("file: top-level JSON must be an array or JSONL");
    }
    raw = data.map((obj, i) => [`record ${i + 1}`, obj]);
  } else {
    raw = [];
    text.split("\n").forEach((line, i) => {
      if (line.trim().length === 0) {
        return;
      }
      raw.push([`line ${i + 1}`, JSON.parse(line)]);
    });
  }
  const papers: Paper[] = [];
  const seen = new Set<string>();
  for (const [label, obj] of raw) {
    const paper = parsePaper(obj, label);
    if (seen.has(paper.paper_id)) {
      throw new Error(`${label}: duplicate paper_id '${paper.paper_id}'`);
    }
    seen.add(paper.paper_id);
    papers.push(paper);
  }
  return papers;
}
