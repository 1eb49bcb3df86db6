"""Cross-paper recommendation metrics: category precision and similarity stats.

These quantify the relevance/diversity trade-off of recommended reference
figures: how many share the query's field, how close the candidate abstracts
sit to the query abstract, and how visually close the recommended summary
figures are to the author's own (a weighted clamped cosine).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .embeddings import EmbeddingStore, abstract_key, cosine, ga_key
from .errors import ZeroNormError
from .retrieval import RankedList

CLIP_WEIGHT = 2.5


def field_precision_at_k(ranked: RankedList, k: int, corpus: Corpus,
                         query_paper_id: str) -> float:
    """Fraction of the top k whose paper shares the query's primary category."""
    if not ranked.entries:
        raise ValueError("empty ranked list")
    query_cat = corpus.get(query_paper_id).primary_category
    top = ranked.entries[:k]
    hits = sum(1 for cid, _ in top if corpus.get(cid).primary_category == query_cat)
    return hits / len(top)


def sim_stats_at_k(query_vec, candidate_vecs) -> tuple[float, float]:
    """Population mean and std of cosine(query, candidate) over the candidates."""
    if len(candidate_vecs) == 0:
        raise ValueError("no candidate vectors")
    sims = np.array([cosine(query_vec, v) for v in candidate_vecs], dtype=np.float64)
    return float(sims.mean()), float(sims.std())


def clip_score_pair(u, v, weight: float = CLIP_WEIGHT, clamp: bool = True) -> float:
    """weight * max(cosine, 0); the clamp can be disabled."""
    if weight <= 0.0:
        raise ValueError(f"weight must be positive, got {weight}")
    rho = cosine(u, v)
    if clamp:
        rho = max(rho, 0.0)
    return weight * rho


@dataclass
class InterRow:
    query_id: str
    field_p: float
    abs2abs_mean: float
    abs2abs_std: float
    ga2ga_mean: float | None  # None when the query has no own-GA embedding
    ga2ga_std: float | None


@dataclass
class InterMetricReport:
    rows: list[InterRow]
    aggregates: dict[str, float]
    k: int
    ga2ga_skipped: int = 0


def _checked_vec(store: EmbeddingStore, key: str) -> np.ndarray:
    vec = np.asarray(store.get(key), dtype=np.float64)
    if not np.linalg.norm(vec) > 0.0:
        raise ZeroNormError(f"zero-norm embedding for key '{key}'")
    return vec


def inter_row(corpus: Corpus, store: EmbeddingStore, ranked: RankedList, k: int,
              weight: float = CLIP_WEIGHT, clamp: bool = True) -> InterRow:
    """All inter metrics for one query's ranked list of foreign paper ids."""
    qid = ranked.query_paper_id
    field_p = field_precision_at_k(ranked, k, corpus, qid)
    top_ids = [cid for cid, _ in ranked.entries[:k]]

    abs_q = _checked_vec(store, abstract_key(qid))
    abs_vecs = [_checked_vec(store, abstract_key(cid)) for cid in top_ids]
    abs_mean, abs_std = sim_stats_at_k(abs_q, abs_vecs)

    ga_mean = ga_std = None
    q_ga_key = ga_key(qid)
    if q_ga_key in store:
        ga_q = _checked_vec(store, q_ga_key)
        scores = np.array(
            [clip_score_pair(ga_q, _checked_vec(store, ga_key(cid)), weight, clamp)
             for cid in top_ids],
            dtype=np.float64,
        )
        ga_mean, ga_std = float(scores.mean()), float(scores.std())
    return InterRow(qid, field_p, abs_mean, abs_std, ga_mean, ga_std)


def aggregate_inter(rows: list[InterRow], k: int) -> InterMetricReport:
    """Column means; GA-to-GA aggregates cover only queries that had an own GA."""
    if not rows:
        raise ValueError("no rows to aggregate")
    n = len(rows)
    agg = {
        "field_p": sum(r.field_p for r in rows) / n,
        "abs2abs_mean": sum(r.abs2abs_mean for r in rows) / n,
        "abs2abs_std": sum(r.abs2abs_std for r in rows) / n,
        "queries": n,
    }
    with_ga = [r for r in rows if r.ga2ga_mean is not None]
    if with_ga:
        agg["ga2ga_mean"] = sum(r.ga2ga_mean for r in with_ga) / len(with_ga)
        agg["ga2ga_std"] = sum(r.ga2ga_std for r in with_ga) / len(with_ga)
    return InterMetricReport(rows, agg, k, ga2ga_skipped=n - len(with_ga))
