"""Ranked-list evaluation: confidence-adjusted ratio (CAR@k), recall, MRR, nDCG.

CAR@k turns the top-k raw scores into a probability vector (z-score then
softmax), takes the probability ratio of the best-ranked ground-truth item
to the rank-1 item, and scales it by an entropy-based confidence term in
[0.5, 1.0]. Natural log throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoGroundTruthError
from .retrieval import RankedList

HIST_BIN_WIDTH = 0.05


@dataclass
class CarConfig:
    k: int = 5
    alpha: float = 0.5
    zscore_scope: str = "topk"  # "topk" or "full"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.zscore_scope not in ("topk", "full"):
            raise ValueError(f"unknown zscore scope '{self.zscore_scope}'")


def softmax_z(scores) -> np.ndarray:
    """Standardize scores (population std; zero std gives uniform), then softmax."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size < 1:
        raise ValueError("scores must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    std = float(s.std())
    if std == 0.0:
        z = np.zeros_like(s)
    else:
        z = (s - s.mean()) / std
    e = np.exp(z - z.max())
    return e / e.sum()


def _check_distribution(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 1 or np.any(p < 0.0) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError("not a probability distribution")
    return p


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 ln 0 = 0."""
    p = _check_distribution(p)
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum() + 0.0)


def confidence(p, k: int, alpha: float = 0.5) -> float:
    """Entropy-based confidence in [0.5, 1.0]; 1.0 at or below h = alpha ln k."""
    p = _check_distribution(p)
    h_max = math.log(k)
    h = alpha * h_max
    if np.all(p == p[0]):
        # exactly uniform: entropy is h_max by identity; skip the float
        # roundoff of summing p ln p so the uniform case lands on 0.5 exactly
        ent = h_max
    else:
        ent = entropy(p)
    if ent <= h or h_max - h == 0.0:
        return 1.0
    c = 1.0 - 0.5 * (ent - h) / (h_max - h)
    return min(1.0, max(0.5, c))


@dataclass
class CarBreakdown:
    car: float
    ratio: float
    confidence: float
    entropy: float
    h: float
    gt_in_top_k: bool
    probabilities: np.ndarray
    k_eff: int


def car_at_k(ranked: RankedList, gt_ids, config: CarConfig) -> CarBreakdown:
    """CAR@k of a ranked list against a nonempty ground-truth id set."""
    if not gt_ids:
        raise NoGroundTruthError("empty ground-truth set")
    if not ranked.entries:
        raise ValueError("empty ranked list")
    k_eff = min(config.k, len(ranked.entries))
    top = ranked.entries[:k_eff]
    if config.zscore_scope == "full":
        p_full = softmax_z([score for _, score in ranked.entries])
        p = p_full[:k_eff]
        p = p / p.sum()
    else:
        p = softmax_z([score for _, score in top])
    gt_index = next((i for i, (cid, _) in enumerate(top) if cid in gt_ids), None)
    conf = confidence(p, k_eff, config.alpha)
    ent = entropy(p)
    h = config.alpha * math.log(k_eff)
    if gt_index is None:
        return CarBreakdown(0.0, 0.0, conf, ent, h, False, p, k_eff)
    ratio = float(p[gt_index] / p[0])
    return CarBreakdown(ratio * conf, ratio, conf, ent, h, True, p, k_eff)


def recall_at_k(ranked: RankedList, gt_ids, k: int) -> int:
    if not gt_ids:
        raise NoGroundTruthError("empty ground-truth set")
    return int(any(cid in gt_ids for cid, _ in ranked.entries[:k]))


def mrr(ranked: RankedList, gt_ids) -> float:
    """Reciprocal rank of the best-ranked ground-truth item; 0 if absent."""
    if not gt_ids:
        raise NoGroundTruthError("empty ground-truth set")
    for i, (cid, _) in enumerate(ranked.entries):
        if cid in gt_ids:
            return 1.0 / (i + 1)
    return 0.0


def ndcg_at_k(ranked: RankedList, gt_ids, k: int) -> float:
    """Binary-relevance nDCG with gain 1/log2(rank+1) over the top k."""
    if not gt_ids:
        raise NoGroundTruthError("empty ground-truth set")
    dcg = sum(
        1.0 / math.log2(i + 2)
        for i, (cid, _) in enumerate(ranked.entries[:k])
        if cid in gt_ids
    )
    ideal = sum(1.0 / math.log2(i + 2) for i in range(min(k, len(gt_ids))))
    return dcg / ideal


@dataclass
class IntraRow:
    query_id: str
    recalls: dict[int, int]
    mrr: float
    ndcg: float
    car: CarBreakdown


def intra_row(ranked: RankedList, gt_ids, ks=(1, 5, 10),
              config: CarConfig | None = None) -> IntraRow:
    """All per-query metrics for one ranked list; nDCG shares CAR's k."""
    if config is None:
        config = CarConfig()
    return IntraRow(
        query_id=ranked.query_paper_id,
        recalls={k: recall_at_k(ranked, gt_ids, k) for k in ks},
        mrr=mrr(ranked, gt_ids),
        ndcg=ndcg_at_k(ranked, gt_ids, config.k),
        car=car_at_k(ranked, gt_ids, config),
    )


@dataclass
class IntraMetricReport:
    rows: list[IntraRow]
    aggregates: dict[str, float]
    histogram: list[tuple[float, float, int]] = field(default_factory=list)


def car_histogram(values) -> list[tuple[float, float, int]]:
    """Fixed-width bins over [0, 1]; the last bin includes 1.0."""
    # i/20 keeps the edges exact where cumulative 0.05 steps would drift
    edges = np.array([i / 20 for i in range(21)], dtype=np.float64)
    counts, _ = np.histogram(np.asarray(values, dtype=np.float64), bins=edges)
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i]))
        for i in range(len(counts))
    ]


def aggregate_intra(rows: list[IntraRow]) -> IntraMetricReport:
    """Arithmetic means plus the CAR > 0.5 fraction and CAR histogram."""
    if not rows:
        raise ValueError("no rows to aggregate")
    n = len(rows)
    agg: dict[str, float] = {}
    for k in rows[0].recalls:
        agg[f"r_at_{k}"] = sum(r.recalls[k] for r in rows) / n
    agg["mrr"] = sum(r.mrr for r in rows) / n
    agg["ndcg"] = sum(r.ndcg for r in rows) / n
    cars = [r.car.car for r in rows]
    agg["car"] = sum(cars) / n
    agg["car_gt_half_fraction"] = sum(1 for c in cars if c > 0.5) / n
    agg["queries"] = n
    return IntraMetricReport(rows, agg, car_histogram(cars))
