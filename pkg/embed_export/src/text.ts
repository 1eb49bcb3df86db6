/**
 * Caption and abstract text preparation.
 *
 * Corpus text may carry inline span markers such as <MATH>...</MATH>.
 * Encoders never see those spans: the marker pair and everything inside
 * it are dropped, including nested spans of a different kind.
 */

const SPAN_TAGS = ["MATH", "NOTE", "TAG"];
const TAG_RE = new RegExp(`</?(?:${SPAN_TAGS.join("|")})>`, "g");

/** Remove marked spans wholesale, leaving the surrounding text untouched. */
export function dropSpecialSpans(text: string): string {
  let out = "";
  let depth = 0;
  let last = 0;
  TAG_RE.lastIndex = 0;
  for (const m of text.matchAll(TAG_RE)) {
    const idx = m.index ?? 0;
    if (depth === 0) {
      out += text.slice(last, idx);
    }
    if (m[0].startsWith("</")) {
      if (depth > 0) {
        depth -= 1;
      }
    } else {
      depth += 1;
    }
    last = idx + m[0].length;
  }
  if (depth === 0) {
    out += text.slice(last);
  }
  return out;
}

/** Lowercase alphanumeric tokens, in order of appearance. */
export function tokenize(text: string): string[] {
  const matched = dropSpecialSpans(text).toLowerCase().match(/[a-z0-9]+/g);
  return matched ?? [];
}
