"""Lexical relevance scorers: ROUGE-L, BM25, and CIDEr over token sequences.

All scorers are pure functions of normalized token lists plus, where needed,
pool-level statistics built by the caller. Nothing here touches embeddings.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

_NON_ALNUM_RE = re.compile(r"[^0-9a-z]+")

# recall weighting for the LCS F-measure (beta = 1.2)
ROUGE_BETA2 = 1.44

BM25_K1 = 1.2
BM25_B = 0.75

CIDER_MAX_N = 4
CIDER_SCALE = 10.0


def normalize(text: str) -> list[str]:
    """Lowercase, punctuation to spaces, whitespace split."""
    return _NON_ALNUM_RE.sub(" ", text.lower()).split()


def lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(cur[j], prev[j + 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str], beta2: float = ROUGE_BETA2) -> float:
    """LCS F-measure; 0 when either side is empty."""
    if not candidate or not reference:
        return 0.0
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return ((1.0 + beta2) * p * r) / (r + beta2 * p)


@dataclass
class Bm25Stats:
    """Document frequencies and average length over one scoring pool."""

    doc_count: int
    doc_freq: dict[str, int]
    avgdl: float

    @classmethod
    def from_pool(cls, docs: list[list[str]]) -> "Bm25Stats":
        df: dict[str, int] = {}
        total = 0
        for doc in docs:
            total += len(doc)
            for term in set(doc):
                df[term] = df.get(term, 0) + 1
        n = len(docs)
        avgdl = total / n if n else 0.0
        return cls(n, df, avgdl)

    def idf(self, term: str) -> float:
        df = self.doc_freq.get(term, 0)
        return math.log((self.doc_count - df + 0.5) / (df + 0.5) + 1.0)


def bm25(query: list[str], doc: list[str], stats: Bm25Stats,
         k1: float = BM25_K1, b: float = BM25_B) -> float:
    """Okapi score of doc for query; repeated query terms each contribute."""
    if not query or not doc:
        return 0.0
    tf: dict[str, int] = {}
    for term in doc:
        tf[term] = tf.get(term, 0) + 1
    avgdl = stats.avgdl if stats.avgdl > 0 else 1.0
    norm = k1 * (1.0 - b + b * len(doc) / avgdl)
    score = 0.0
    for term in query:
        t = tf.get(term, 0)
        if t == 0:
            continue
        score += stats.idf(term) * (t * (k1 + 1.0)) / (t + norm)
    return score


def _ngram_counts(tokens: list[str], n: int) -> dict[tuple, int]:
    counts: dict[tuple, int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i:i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


@dataclass
class IdfTable:
    """Per-order n-gram idf weights from a reference caption pool."""

    doc_count: int
    doc_freq: list[dict[tuple, int]] = field(default_factory=list)  # index n-1

    @classmethod
    def from_pool(cls, docs: list[list[str]], max_n: int = CIDER_MAX_N) -> "IdfTable":
        freq = [dict() for _ in range(max_n)]
        for doc in docs:
            for n in range(1, max_n + 1):
                for gram in _ngram_counts(doc, n):
                    freq[n - 1][gram] = freq[n - 1].get(gram, 0) + 1
        return cls(len(docs), freq)

    def idf(self, gram: tuple) -> float:
        n = len(gram)
        df = self.doc_freq[n - 1].get(gram, 0)
        return math.log(max(1, self.doc_count) / max(1, df))


def cider(candidate: list[str], reference: list[str], idf: IdfTable) -> float:
    """Mean tf-idf n-gram cosine over orders 1..4, scaled by 10."""
    sims = []
    for n in range(1, CIDER_MAX_N + 1):
        c = _ngram_counts(candidate, n)
        r = _ngram_counts(reference, n)
        cw = {g: cnt * idf.idf(g) for g, cnt in c.items()}
        rw = {g: cnt * idf.idf(g) for g, cnt in r.items()}
        nc = math.sqrt(sum(w * w for w in cw.values()))
        nr = math.sqrt(sum(w * w for w in rw.values()))
        if nc == 0.0 or nr == 0.0:
            sims.append(0.0)
            continue
        dot = sum(w * rw[g] for g, w in cw.items() if g in rw)
        sims.append(dot / (nc * nr))
    return CIDER_SCALE * sum(sims) / CIDER_MAX_N
