/**
 * Sidecar report written next to every embedding file.
 *
 * The report makes a run auditable without re-reading the binary: which
 * encoder produced it, what was asked for, what was skipped and why, and
 * how often text hit the token limit. No timestamps, so identical runs
 * produce identical reports.
 */

import { writeFileSync } from "node:fs";

export interface SkippedEntity {
  key: string;
  reason: string;
}

export interface ExportReport {
  encoder: string;
  dim: number;
  kinds: string[];
  records: number;
  skipped: SkippedEntity[];
  token_limit: number;
  truncated: number;
}

export function reportPath(outPath: string): string {
  return outPath + ".report.json";
}

export function writeReport(outPath: string, report: ExportReport): string {
  const path = reportPath(outPath);
  const ordered: Record<string, unknown> = {
    encoder: report.encoder,
    dim: report.dim,
    kinds: report.kinds,
    records: report.records,
    skipped: report.skipped,
    token_limit: report.token_limit,
    truncated: report.truncated,
  };
  writeFileSync(path, JSON.stringify(ordered, null, 2) + "\n", "utf-8");
  return path;
}
