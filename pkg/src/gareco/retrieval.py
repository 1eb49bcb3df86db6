"""Candidate construction and relevance scoring for both recommendation tasks.

Intra task: rank a paper's own figures as ground-truth candidates. Inter
task: rank other papers' author-made summary figures as design references.
Scores are raw (method-specific scale); ranking sorts by score descending
with ties broken by candidate insertion order.
"""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, FigureRecord, GtPolicy, ground_truth_set, strip_caption_tags, strip_special_tokens
from .embeddings import (
    EmbeddingStore,
    abstract_key,
    caption_key,
    cosine,
    figure_key,
    fuse_hadamard,
    ga_key,
    subfigure_key,
)
from .errors import MissingEmbeddingError, ZeroNormError
from .lexical import Bm25Stats, IdfTable, bm25, cider, normalize, rouge_l

METHODS = ("abs2cap-rougeL", "abs2cap-bm25", "abs2cap-cider", "abs2fig", "abs2fig-cap", "random")
TASKS = ("intra", "inter")

# rank-last marker for candidates with no usable score; well below any real
# cosine, lexical, or random score
SENTINEL_SCORE = -1.0e9


@dataclass
class Candidate:
    candidate_id: str
    paper_id: str
    figure: FigureRecord
    kind: str  # "figure" for intra, "ga" for inter


@dataclass
class CandidateSet:
    query_paper_id: str
    task: str
    candidates: list[Candidate]
    gt_ids: set[str] = field(default_factory=set)


@dataclass
class MethodConfig:
    method: str
    seed: int | None = None
    adapter: np.ndarray | None = None
    lexical_subfigures: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method '{self.method}' (expected one of {METHODS})")
        if self.method == "random" and self.seed is None:
            raise ValueError("method 'random' requires a seed")


@dataclass
class RankedList:
    query_paper_id: str
    method: str
    entries: list[tuple[str, float]]  # (candidate_id, raw_score), score desc
    tie_break: str = "insertion-order"
    unscored: int = 0


def build_candidates(corpus: Corpus, paper_id: str, task: str,
                     reference_split: str = "train",
                     gt_policy: GtPolicy = GtPolicy.GA_ONLY) -> CandidateSet:
    """Candidate set in deterministic order: document order (intra) or corpus order (inter)."""
    if task not in TASKS:
        raise ValueError(f"unknown task '{task}' (expected one of {TASKS})")
    paper = corpus.get(paper_id)
    if task == "intra":
        gt = ground_truth_set(paper, gt_policy)
        cands = [Candidate(f.figure_id, paper_id, f, "figure") for f in paper.figures]
        return CandidateSet(paper_id, task, cands, gt)
    cands = []
    for other in corpus:
        if other.split != reference_split or other.ga is None or other.paper_id == paper_id:
            continue
        fig = other.figure(other.ga.ga_figure_id)
        cands.append(Candidate(other.paper_id, other.paper_id, fig, "ga"))
    return CandidateSet(paper_id, task, cands, set())


def clean_score_text(text: str) -> str:
    return strip_caption_tags(strip_special_tokens(text, "drop"))


def candidate_texts(cand: Candidate, include_subfigures: bool = True) -> list[str]:
    """Caption texts scored for one candidate (own caption plus subfigure captions)."""
    texts = [clean_score_text(cand.figure.caption)]
    if include_subfigures:
        texts.extend(clean_score_text(s.caption) for s in cand.figure.subfigures)
    return texts


def reference_pool(corpus: Corpus, reference_split: str = "train") -> list[Candidate]:
    """Every GA candidate of the reference split, nobody excluded."""
    return [
        Candidate(p.paper_id, p.paper_id, p.figure(p.ga.ga_figure_id), "ga")
        for p in corpus
        if p.split == reference_split and p.ga is not None
    ]


def build_cider_idf(candidates: list[Candidate], include_subfigures: bool = True) -> IdfTable:
    """Idf table over every caption text the given candidates contribute.

    Pass each distinct candidate once: the intra pools of all queried papers
    concatenated, or the inter reference pool.
    """
    docs = []
    for cand in candidates:
        docs.extend(normalize(t) for t in candidate_texts(cand, include_subfigures))
    return IdfTable.from_pool(docs)


def _checked_cosine(q: np.ndarray, q_key: str, v: np.ndarray, v_key: str) -> float:
    if not np.linalg.norm(np.asarray(q, dtype=np.float64)) > 0.0:
        raise ZeroNormError(f"zero-norm embedding for key '{q_key}'")
    if not np.linalg.norm(np.asarray(v, dtype=np.float64)) > 0.0:
        raise ZeroNormError(f"zero-norm embedding for key '{v_key}'")
    return cosine(q, v)


def _entity_keys(cand: Candidate) -> list[tuple[str, str]]:
    """(image key, caption key) per scorable sub-entity of the candidate."""
    pid = cand.paper_id
    fid = cand.figure.figure_id
    if cand.kind == "ga":
        return [(ga_key(pid), caption_key(pid, fid))]
    pairs = [(figure_key(pid, fid), caption_key(pid, fid))]
    for sub in cand.figure.subfigures:
        pairs.append((subfigure_key(pid, fid, sub.subfigure_id), caption_key(pid, fid, sub.subfigure_id)))
    return pairs


def _embedding_scores(config: MethodConfig, cset: CandidateSet, store: EmbeddingStore):
    q_key = abstract_key(cset.query_paper_id)
    q = store.get(q_key)
    fused = config.method == "abs2fig-cap"
    scores = []
    unscored = 0
    for cand in cset.candidates:
        best = None
        for img_key, cap_key in _entity_keys(cand):
            if img_key not in store:
                continue
            vec = np.asarray(store.get(img_key), dtype=np.float64)
            if fused:
                # precondition: a caption vector exists for every entity scored
                vec = fuse_hadamard(vec, store.get(cap_key))
                if not np.any(vec):
                    raise ZeroNormError(f"zero-norm fused embedding for keys '{img_key}' * '{cap_key}'")
            if config.adapter is not None:
                vec = config.adapter @ vec
            s = _checked_cosine(q, q_key, vec, img_key)
            if best is None or s > best:
                best = s
        if best is None:
            scores.append(SENTINEL_SCORE)
            unscored += 1
        else:
            scores.append(best)
    return scores, unscored


def _lexical_scores(config: MethodConfig, cset: CandidateSet, corpus: Corpus,
                    idf: IdfTable | None):
    paper = corpus.get(cset.query_paper_id)
    query_tokens = normalize(strip_special_tokens(paper.abstract, "drop"))
    per_cand = [
        [normalize(t) for t in candidate_texts(c, config.lexical_subfigures)]
        for c in cset.candidates
    ]
    if config.method == "abs2cap-rougeL":
        def score_one(doc):
            return rouge_l(doc, query_tokens)
    elif config.method == "abs2cap-bm25":
        stats = Bm25Stats.from_pool([d for docs in per_cand for d in docs])

        def score_one(doc):
            return bm25(query_tokens, doc, stats)
    else:  # abs2cap-cider
        if idf is None:
            idf = IdfTable.from_pool([d for docs in per_cand for d in docs])

        def score_one(doc):
            return cider(doc, query_tokens, idf)
    return [max(score_one(doc) for doc in docs) for docs in per_cand], 0


def score_candidates(config: MethodConfig, cset: CandidateSet, corpus: Corpus,
                     store: EmbeddingStore | None = None,
                     idf: IdfTable | None = None) -> RankedList:
    """Raw scores for every candidate, ranked descending with index tie-break.

    Candidates whose every sub-entity lacks an embedding get a sentinel score
    and rank last; their count is recorded on the result.
    """
    if config.method in ("abs2fig", "abs2fig-cap"):
        if store is None:
            raise ValueError(f"method '{config.method}' requires an embedding store")
        scores, unscored = _embedding_scores(config, cset, store)
    elif config.method == "random":
        rng = np.random.default_rng([config.seed, zlib.crc32(cset.query_paper_id.encode("utf-8"))])
        scores, unscored = list(rng.random(len(cset.candidates))), 0
    else:
        scores, unscored = _lexical_scores(config, cset, corpus, idf)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    entries = [(cset.candidates[i].candidate_id, float(scores[i])) for i in order]
    return RankedList(cset.query_paper_id, config.method, entries, unscored=unscored)


def top_k(ranked: RankedList, k: int) -> RankedList:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return RankedList(ranked.query_paper_id, ranked.method, ranked.entries[:k],
                      ranked.tie_break, ranked.unscored)


SCORE_CSV_HEADER = ["query_id", "candidate_id", "raw_score", "rank"]


def write_scores(ranked_lists: list[RankedList], path) -> None:
    """Score-matrix CSV; raw_score uses shortest round-trip decimal form."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_CSV_HEADER)
        for ranked in ranked_lists:
            for rank, (cid, score) in enumerate(ranked.entries, start=1):
                writer.writerow([ranked.query_paper_id, cid, repr(float(score)), rank])


def read_scores(path) -> list[RankedList]:
    """Re-ingest a score-matrix CSV; one RankedList per query block, file order."""
    lists: list[RankedList] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCORE_CSV_HEADER:
            raise ValueError(f"bad score CSV header: {header}")
        for row in reader:
            if len(row) != 4:
                raise ValueError(f"bad score CSV row: {row}")
            qid, cid, score, _rank = row
            if not lists or lists[-1].query_paper_id != qid:
                lists.append(RankedList(qid, "imported", []))
            lists[-1].entries.append((cid, float(score)))
    return lists
