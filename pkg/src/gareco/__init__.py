"""Graphical-abstract recommendation toolkit.

Corpus handling, lexical and embedding relevance scoring, contrastive
objectives over frozen embeddings, and ranked-list evaluation centered on a
confidence-adjusted ranking metric.
"""

__version__ = "0.1.0"

from .contrastive import (
    DEFAULT_TAU,
    LinearAdapter,
    TrainConfig,
    derive_padding_mask,
    info_nce,
    info_nce_grad,
    load_adapter,
    loss_inter,
    loss_inter_fused,
    loss_intra,
    loss_intra_fused,
    save_adapter,
    train_adapter,
)
from .corpus import (
    GA_TYPES,
    SPLITS,
    Corpus,
    CorpusStats,
    FigureRecord,
    GaRecord,
    GtPolicy,
    PaperRecord,
    SubfigureRecord,
    TokenSummary,
    compute_stats,
    ground_truth_set,
    load_corpus,
    save_corpus,
    strip_caption_tags,
    strip_special_tokens,
)
from .embeddings import (
    EmbeddingStore,
    abstract_key,
    adapter_row_key,
    caption_key,
    cosine,
    figure_key,
    fuse_hadamard,
    ga_key,
    load_embeddings,
    save_embeddings,
    subfigure_key,
)
from .errors import (
    CorpusValidationError,
    DimensionMismatchError,
    EmbeddingFormatError,
    GarecoError,
    MissingEmbeddingError,
    NoGroundTruthError,
    UnbalancedTokenError,
    ZeroNormError,
)
from .inter_metrics import (
    CLIP_WEIGHT,
    InterMetricReport,
    InterRow,
    aggregate_inter,
    clip_score_pair,
    field_precision_at_k,
    inter_row,
    sim_stats_at_k,
)
from .lexical import Bm25Stats, IdfTable, bm25, cider, lcs_length, normalize, rouge_l
from .metrics import (
    CarBreakdown,
    CarConfig,
    IntraMetricReport,
    IntraRow,
    aggregate_intra,
    car_at_k,
    car_histogram,
    confidence,
    entropy,
    intra_row,
    mrr,
    ndcg_at_k,
    recall_at_k,
    softmax_z,
)
from .retrieval import (
    METHODS,
    SENTINEL_SCORE,
    TASKS,
    Candidate,
    CandidateSet,
    MethodConfig,
    RankedList,
    build_candidates,
    build_cider_idf,
    candidate_texts,
    clean_score_text,
    read_scores,
    reference_pool,
    score_candidates,
    top_k,
    write_scores,
)

__all__ = [name for name in dir() if not name.startswith("_")]
