"""Contrastive objectives over frozen embeddings, with analytic gradients.

One positive is contrasted against a set of negatives at temperature tau,
through cosine similarity. Zero-padded negative slots are masked out: they
contribute nothing to the loss or any gradient, bit-identically to removing
them. A small plain-gradient-descent trainer fits a linear adapter on the
image side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .embeddings import (
    EmbeddingStore,
    abstract_key,
    adapter_row_key,
    caption_key,
    figure_key,
    fuse_hadamard,
    ga_key,
    load_embeddings,
    save_embeddings,
)
from .errors import EmbeddingFormatError, ZeroNormError

DEFAULT_TAU = 0.07


def _as_f64(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64)


def _unit_and_norm(v: np.ndarray, role: str):
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ZeroNormError(f"zero-norm {role} vector")
    return v / n, n


def _valid_negatives(negatives, mask):
    negs = [_as_f64(n) for n in negatives]
    if mask is None:
        return negs, [True] * len(negs)
    mask = list(mask)
    if len(mask) != len(negs):
        raise ValueError(f"mask length {len(mask)} != negatives length {len(negs)}")
    return negs, mask


def info_nce(z_q, z_pos, negatives, mask=None, tau: float = DEFAULT_TAU) -> float:
    """Softmax cross-entropy of the positive against unmasked negatives."""
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    q = _as_f64(z_q)
    negs, mask = _valid_negatives(negatives, mask)
    uq, _ = _unit_and_norm(q, "query")
    upos, _ = _unit_and_norm(_as_f64(z_pos), "positive")
    sims = [float(uq @ upos) / tau]
    for neg, valid in zip(negs, mask):
        if not valid:
            continue
        uneg, _ = _unit_and_norm(neg, "negative")
        sims.append(float(uq @ uneg) / tau)
    s = np.array(sims, dtype=np.float64)
    m = s.max()
    return float(m + np.log(np.exp(s - m).sum()) - s[0])


def _rho_grads(q: np.ndarray, x: np.ndarray):
    """cosine and its gradients w.r.t. both arguments."""
    nq = np.linalg.norm(q)
    nx = np.linalg.norm(x)
    if nq == 0.0 or nx == 0.0:
        raise ZeroNormError("zero-norm vector in cosine gradient")
    rho = float(q @ x / (nq * nx))
    dq = x / (nq * nx) - rho * q / (nq * nq)
    dx = q / (nq * nx) - rho * x / (nx * nx)
    return rho, dq, dx


def info_nce_grad(z_q, z_pos, negatives, mask=None, tau: float = DEFAULT_TAU):
    """Loss plus exact gradients w.r.t. query, positive, and every negative.

    Masked negatives get zero gradient rows.
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    q = _as_f64(z_q)
    pos = _as_f64(z_pos)
    negs, mask = _valid_negatives(negatives, mask)

    rho_pos, dpos_dq, dpos_dx = _rho_grads(q, pos)
    rows = [(rho_pos, dpos_dq, dpos_dx, None)]
    for i, (neg, valid) in enumerate(zip(negs, mask)):
        if not valid:
            continue
        rho, dq, dx = _rho_grads(q, neg)
        rows.append((rho, dq, dx, i))

    s = np.array([r[0] / tau for r in rows], dtype=np.float64)
    m = s.max()
    e = np.exp(s - m)
    p = e / e.sum()
    loss = float(m + np.log(e.sum()) - s[0])

    grad_q = np.zeros_like(q)
    grad_pos = np.zeros_like(pos)
    grad_negs = [np.zeros_like(n) for n in negs]
    for j, (rho, dq, dx, neg_index) in enumerate(rows):
        coeff = (p[j] - (1.0 if j == 0 else 0.0)) / tau
        grad_q += coeff * dq
        if neg_index is None:
            grad_pos = coeff * dx
        else:
            grad_negs[neg_index] = coeff * dx
    return loss, grad_q, grad_pos, grad_negs


def derive_padding_mask(figure_vecs) -> list[bool]:
    """Zero-padded slots are the all-zero rows."""
    return [bool(np.any(_as_f64(v) != 0.0)) for v in figure_vecs]


def loss_intra(abstracts, gas, figure_sets, masks=None, tau: float = DEFAULT_TAU) -> float:
    """Mean per-paper loss: abstract vs own GA against the paper's other figures."""
    if not (len(abstracts) == len(gas) == len(figure_sets)):
        raise ValueError("abstracts, gas, and figure_sets must have equal length")
    if len(abstracts) == 0:
        raise ValueError("empty batch")
    if masks is None:
        masks = [derive_padding_mask(figs) for figs in figure_sets]
    losses = [
        info_nce(q, g, figs, mask, tau)
        for q, g, figs, mask in zip(abstracts, gas, figure_sets, masks)
    ]
    return float(sum(losses) / len(losses))


def loss_inter(abstracts, gas, tau: float = DEFAULT_TAU) -> float:
    """Symmetric cross-paper loss: text-to-image and image-to-text halves."""
    n = len(abstracts)
    if n != len(gas):
        raise ValueError("abstracts and gas must have equal length")
    if n < 2:
        raise ValueError("inter loss needs a batch of at least 2")
    t2i = [
        info_nce(abstracts[i], gas[i], [gas[j] for j in range(n) if j != i], None, tau)
        for i in range(n)
    ]
    i2t = [
        info_nce(gas[i], abstracts[i], [abstracts[j] for j in range(n) if j != i], None, tau)
        for i in range(n)
    ]
    return float(0.5 * sum(t2i) / n + 0.5 * sum(i2t) / n)


def _fuse_set(vecs, caption_vecs):
    if len(vecs) != len(caption_vecs):
        raise ValueError("every figure vector needs a caption vector")
    return [fuse_hadamard(v, c) for v, c in zip(vecs, caption_vecs)]


def loss_intra_fused(abstracts, gas, ga_captions, figure_sets, caption_sets,
                     masks=None, tau: float = DEFAULT_TAU) -> float:
    """loss_intra with every image vector replaced by image * caption."""
    if masks is None:
        masks = [derive_padding_mask(figs) for figs in figure_sets]
    fused_gas = _fuse_set(gas, ga_captions)
    fused_sets = [_fuse_set(f, c) for f, c in zip(figure_sets, caption_sets)]
    return loss_intra(abstracts, fused_gas, fused_sets, masks, tau)


def loss_inter_fused(abstracts, gas, ga_captions, tau: float = DEFAULT_TAU) -> float:
    """loss_inter with every GA vector replaced by GA * caption."""
    return loss_inter(abstracts, _fuse_set(gas, ga_captions), tau)


@dataclass
class LinearAdapter:
    matrix: np.ndarray

    def apply(self, vec) -> np.ndarray:
        return self.matrix @ _as_f64(vec)

    @classmethod
    def identity(cls, dim: int) -> "LinearAdapter":
        return cls(np.eye(dim, dtype=np.float64))


def save_adapter(adapter: LinearAdapter, path) -> None:
    """One embedding record per matrix row."""
    dim = adapter.matrix.shape[1]
    store = EmbeddingStore(dim)
    for i, row in enumerate(adapter.matrix):
        store.add(adapter_row_key(i), row)
    save_embeddings(store, path)


def load_adapter(path) -> LinearAdapter:
    store = load_embeddings(path)
    rows = []
    for i in range(len(store)):
        key = adapter_row_key(i)
        if key not in store:
            raise EmbeddingFormatError(f"adapter file missing row key '{key}'")
        rows.append(np.asarray(store.get(key), dtype=np.float64))
    return LinearAdapter(np.array(rows))


@dataclass
class TrainConfig:
    m: int = 4
    batch_size: int = 8
    steps: int = 200
    lr: float = 0.05
    seed: int = 0
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.lr < 0.0:
            raise ValueError(f"lr must be >= 0, got {self.lr}")
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def _paper_vectors(paper, store: EmbeddingStore, fusion: bool, objective: str):
    """(query, raw positive, raw negatives) in pre-adapter space, post-fusion."""
    pid = paper.paper_id
    q = _as_f64(store.get(abstract_key(pid)))
    ga_fid = paper.ga.ga_figure_id
    if objective == "inter":
        pos = _as_f64(store.get(ga_key(pid)))
    else:
        pos = _as_f64(store.get(figure_key(pid, ga_fid)))
    if fusion:
        pos = fuse_hadamard(pos, store.get(caption_key(pid, ga_fid)))
    if objective == "inter":
        return q, pos, []
    negs = []
    for fig in paper.figures:
        if fig.figure_id == ga_fid:
            continue
        vec = _as_f64(store.get(figure_key(pid, fig.figure_id)))
        if fusion:
            vec = fuse_hadamard(vec, store.get(caption_key(pid, fig.figure_id)))
        negs.append(vec)
    return q, pos, negs


def train_adapter(corpus: Corpus, store: EmbeddingStore, config: TrainConfig,
                  objective: str = "intra", fusion: bool = False):
    """Gradient descent on a linear map applied to the image side.

    Returns (LinearAdapter, per-step loss trace). Deterministic for a fixed
    seed; lr = 0 leaves the identity initialization untouched.
    """
    if objective not in ("intra", "inter"):
        raise ValueError(f"unknown objective '{objective}'")
    eligible = [p for p in corpus.split("train") if p.ga is not None]
    if not eligible:
        raise ValueError("no train-split papers with a GA annotation")
    if objective == "inter" and config.batch_size < 2:
        raise ValueError("inter objective needs batch_size >= 2")

    rng = np.random.default_rng(config.seed)
    dim = store.dim
    w = np.eye(dim, dtype=np.float64)
    trace: list[float] = []

    for _ in range(config.steps):
        take = min(config.batch_size, len(eligible))
        batch_idx = np.sort(rng.choice(len(eligible), size=take, replace=False))
        batch = [eligible[i] for i in batch_idx]

        grad_w = np.zeros_like(w)
        losses = []
        if objective == "intra":
            for paper in batch:
                q, pos_raw, negs_all = _paper_vectors(paper, store, fusion, objective)
                if negs_all:
                    pick = np.sort(rng.choice(len(negs_all), size=min(config.m, len(negs_all)), replace=False))
                    negs_raw = [negs_all[i] for i in pick]
                else:
                    negs_raw = []
                # zero-pad to m slots; padded slots are masked out
                mask = [True] * len(negs_raw) + [False] * (config.m - len(negs_raw))
                negs_raw = negs_raw + [np.zeros(dim)] * (config.m - len(negs_raw))
                pos = w @ pos_raw
                negs = [w @ v if ok else v for v, ok in zip(negs_raw, mask)]
                loss, _, g_pos, g_negs = info_nce_grad(q, pos, negs, mask, config.tau)
                losses.append(loss)
                grad_w += np.outer(g_pos, pos_raw)
                for g, raw, ok in zip(g_negs, negs_raw, mask):
                    if ok:
                        grad_w += np.outer(g, raw)
            batch_loss = sum(losses) / len(losses)
            grad_w /= len(losses)
        else:
            raws = []
            qs = []
            for paper in batch:
                q, pos_raw, _ = _paper_vectors(paper, store, fusion, objective)
                qs.append(q)
                raws.append(pos_raw)
            adapted = [w @ v for v in raws]
            n = len(batch)
            half = 0.5 / n
            t2i = i2t = 0.0
            for i in range(n):
                others = [j for j in range(n) if j != i]
                loss, _, g_pos, g_negs = info_nce_grad(
                    qs[i], adapted[i], [adapted[j] for j in others], None, config.tau)
                t2i += loss
                grad_w += half * np.outer(g_pos, raws[i])
                for g, j in zip(g_negs, others):
                    grad_w += half * np.outer(g, raws[j])
                loss, g_q, _, _ = info_nce_grad(
                    adapted[i], qs[i], [qs[j] for j in others], None, config.tau)
                i2t += loss
                grad_w += half * np.outer(g_q, raws[i])
            batch_loss = 0.5 * t2i / n + 0.5 * i2t / n

        trace.append(float(batch_loss))
        w = w - config.lr * grad_w
    return LinearAdapter(w), trace
