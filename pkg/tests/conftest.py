"""Shared fixtures: a hand-built 6-paper corpus and hand-placed embeddings.

Embedding components are all multiples of 0.25 so the 32-bit file format
stores them exactly and oracle math in plain Python sees identical values.
"""

import json

import pytest

from gareco import EmbeddingStore, load_corpus, load_embeddings, save_embeddings

DIM = 4

FIXTURE_PAPERS = [
    {
        "paper_id": "p1",
        "title": "Ranking Figures for Visual Paper Summaries",
        "abstract": "We study how to recommend a summary figure for a paper. "
                    "Our method ranks candidate figures by comparing captions and image "
                    "embeddings against the abstract, and a confidence adjusted metric "
                    "scores the ranking. <MATH>O(n log n)</MATH> preprocessing keeps scoring fast.",
        "primary_category": "cs.CV",
        "split": "test",
        "figures": [
            {"figure_id": "f1",
             "caption": "Figure 1: Training pipeline with <MATH>L</MATH> regularization.",
             "subfigures": [], "is_ga_component": False},
            {"figure_id": "f2",
             "caption": "Figure 2: Overview of the method that ranks candidate figures against the abstract.",
             "subfigures": [], "is_ga_component": True},
            {"figure_id": "f3",
             "caption": "Figure 3: Ablation results.",
             "subfigures": [
                 {"subfigure_id": "s1", "caption": "(a) Recall curves for each ranking method."},
                 {"subfigure_id": "s2", "caption": "(b) Entropy of the score distribution."},
             ],
             "is_ga_component": False, "page": 7},
        ],
        "ga": {"ga_figure_id": "f2", "ga_type": "Reuse", "component_figure_ids": ["f2"],
               "annotator": "rater-3"},
        "teaser_figure_id": None,
        "authors": ["A. Author", "B. Writer"],
    },
    {
        "paper_id": "p2",
        "title": "Contrastive Alignment of Abstracts and Figures",
        "abstract": "Contrastive learning aligns figure embeddings with paper abstracts. "
                    "We sample negatives from the same paper and weight them by a "
                    "temperature scaled softmax.",
        "primary_category": "cs.CV",
        "split": "test",
        "figures": [
            {"figure_id": "f1", "caption": "Figure 1: Data collection workflow.",
             "subfigures": [], "is_ga_component": False},
            {"figure_id": "f2", "caption": "Fig. 2: Loss <MATH>L_C</MATH> against training steps.",
             "subfigures": [], "is_ga_component": False},
            {"figure_id": "fGA",
             "caption": "Figure 3: Overview of contrastive alignment between figure embeddings and abstracts.",
             "subfigures": [], "is_ga_component": False},
        ],
        "ga": {"ga_figure_id": "fGA", "ga_type": "Original", "component_figure_ids": []},
        "teaser_figure_id": None,
    },
    {
        "paper_id": "p3",
        "title": "A Survey of Scientific Figure Design",
        "abstract": "A survey of figure design for scientific communication.",
        "primary_category": "cs.CV",
        "split": "train",
        "figures": [
            {"figure_id": "f1",
             "caption": "Figure 1: Taxonomy of summary figure designs used across venues.",
             "subfigures": [], "is_ga_component": True},
            {"figure_id": "f2", "caption": "Figure 2: Histogram of venue counts.",
             "subfigures": [], "is_ga_component": False},
        ],
        "ga": {"ga_figure_id": "f1", "ga_type": "Reuse", "component_figure_ids": ["f1"]},
        "teaser_figure_id": None,
    },
    {
        "paper_id": "p4",
        "title": "Gradient Methods for Embedding Adapters",
        "abstract": "Plain gradient descent tunes a linear adapter over frozen embeddings.",
        "primary_category": "cs.LG",
        "split": "train",
        "figures": [
            {"figure_id": "f1", "caption": "Figure 1: Adapter architecture.",
             "subfigures": [], "is_ga_component": True},
            {"figure_id": "f2", "caption": "Figure 2: Loss traces.",
             "subfigures": [], "is_ga_component": True},
            {"figure_id": "f3",
             "caption": "Figure 3: Combined adapter architecture and loss traces for frozen embeddings.",
             "subfigures": [], "is_ga_component": False},
        ],
        "ga": {"ga_figure_id": "f3", "ga_type": "Modified", "component_figure_ids": ["f1", "f2"]},
        "teaser_figure_id": None,
    },
    {
        "paper_id": "p5",
        "title": "Benchmarks for Caption Quality",
        "abstract": "Benchmarks for caption quality with lexical scorers.",
        "primary_category": "cs.LG",
        "split": "train",
        "figures": [
            {"figure_id": "f1", "caption": "Figure 1: Benchmark overview diagram.",
             "subfigures": [], "is_ga_component": False},
            {"figure_id": "f2", "caption": "Figure 2: Scorer agreement matrix.",
             "subfigures": [], "is_ga_component": False},
        ],
        "ga": None,
        "teaser_figure_id": "f1",
    },
    {
        "paper_id": "p6",
        "title": "Entropy Calibration for Rankers",
        "abstract": "Entropy calibration for ranking confidence.",
        "primary_category": "cs.CV",
        "split": "val",
        "figures": [
            {"figure_id": "f1", "caption": "Figure 1: Calibration curve.",
             "subfigures": [], "is_ga_component": True},
        ],
        "ga": {"ga_figure_id": "f1", "ga_type": "Reuse", "component_figure_ids": ["f1"]},
        "teaser_figure_id": None,
    },
]

EMBED = {
    "abstract:p1": [1.0, 0.5, 0.0, 0.25],
    "abstract:p2": [0.25, 1.0, 0.5, -0.25],
    "abstract:p3": [1.0, 0.25, -0.25, 0.5],
    "abstract:p4": [0.0, 0.75, 1.0, 0.25],
    "abstract:p5": [0.5, -0.5, 0.25, 1.0],
    "abstract:p6": [0.25, 0.5, -0.75, 1.0],
    "figure:p1/f1": [0.5, -0.25, 0.75, 0.0],
    "figure:p1/f2": [1.0, 0.25, 0.25, 0.5],
    "figure:p1/f3": [0.0, 1.0, -0.5, 0.25],
    "subfigure:p1/f3/s1": [0.25, 0.75, 0.5, -0.5],
    "subfigure:p1/f3/s2": [-0.5, 0.25, 1.0, 0.75],
    "caption:p1/f1": [1.0, 1.0, 0.5, 0.25],
    "caption:p1/f2": [0.75, 0.5, 1.0, 1.0],
    "caption:p1/f3": [0.5, 1.0, 0.75, -0.25],
    "caption:p1/f3/s1": [1.0, 0.25, -0.5, 0.5],
    "caption:p1/f3/s2": [0.25, 0.5, 1.0, -0.75],
    "figure:p2/f1": [1.0, 0.0, 0.25, 0.5],
    "figure:p2/f2": [-0.25, 0.5, 1.0, 0.0],
    "figure:p2/fGA": [0.5, 1.0, 0.25, -0.5],
    "caption:p2/f1": [0.5, 0.75, 1.0, 0.25],
    "caption:p2/f2": [1.0, -0.25, 0.5, 0.75],
    "caption:p2/fGA": [0.75, 1.0, -0.25, 0.5],
    "figure:p3/f1": [0.75, 0.25, 0.5, 1.0],
    "figure:p3/f2": [0.25, -0.5, 1.0, 0.5],
    "caption:p3/f1": [1.0, 0.5, 0.75, 0.25],
    "caption:p3/f2": [0.5, 1.0, 0.25, 0.75],
    "figure:p4/f1": [1.0, 0.75, 0.0, -0.25],
    "figure:p4/f2": [0.5, 0.0, 0.75, 1.0],
    "figure:p4/f3": [-0.5, 1.0, 0.75, 0.25],
    "caption:p4/f1": [0.75, 0.25, 1.0, 0.5],
    "caption:p4/f2": [0.25, 1.0, 0.5, -0.5],
    "caption:p4/f3": [0.5, 0.25, 1.0, 0.75],
    "figure:p6/f1": [0.25, 0.5, -0.75, 1.0],
    "caption:p6/f1": [1.0, 1.0, 1.0, 1.0],
    "ga:p1": [1.0, 0.5, 0.25, 0.0],
    "ga:p2": [0.25, 0.75, 1.0, -0.5],
    "ga:p3": [0.75, 0.25, 0.5, 1.0],
    "ga:p4": [-0.5, 1.0, 0.75, 0.25],
}


# Hand-cleaned text for every fixture string that scoring touches: special
# token spans dropped, leading figure tags removed. Written out by eye so
# lexical expectations never depend on the package's own cleanup code.
HAND_CLEANED = {
    "abstract:p1": "We study how to recommend a summary figure for a paper. "
                   "Our method ranks candidate figures by comparing captions and image "
                   "embeddings against the abstract, and a confidence adjusted metric "
                   "scores the ranking.  preprocessing keeps scoring fast.",
    "abstract:p2": "Contrastive learning aligns figure embeddings with paper abstracts. "
                   "We sample negatives from the same paper and weight them by a "
                   "temperature scaled softmax.",
    ("p1", "f1"): "Training pipeline with  regularization.",
    ("p1", "f2"): "Overview of the method that ranks candidate figures against the abstract.",
    ("p1", "f3"): "Ablation results.",
    ("p1", "f3", "s1"): "(a) Recall curves for each ranking method.",
    ("p1", "f3", "s2"): "(b) Entropy of the score distribution.",
    ("p2", "f1"): "Data collection workflow.",
    ("p2", "f2"): "Loss  against training steps.",
    ("p2", "fGA"): "Overview of contrastive alignment between figure embeddings and abstracts.",
    ("p3", "f1"): "Taxonomy of summary figure designs used across venues.",
    ("p4", "f3"): "Combined adapter architecture and loss traces for frozen embeddings.",
}


def write_corpus_file(path, papers=FIXTURE_PAPERS):
    with open(path, "w", encoding="utf-8") as fh:
        for paper in papers:
            fh.write(json.dumps(paper, ensure_ascii=False) + "\n")


def build_store(embed=EMBED, dim=DIM):
    store = EmbeddingStore(dim)
    for key, vec in embed.items():
        store.add(key, vec)
    return store


def ones_caption_embed():
    return {k: ([1.0] * DIM if k.startswith("caption:") else v) for k, v in EMBED.items()}


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("fixture")


@pytest.fixture(scope="session")
def corpus_path(data_dir):
    path = data_dir / "corpus.jsonl"
    write_corpus_file(path)
    return path


@pytest.fixture(scope="session")
def corpus(corpus_path):
    return load_corpus(corpus_path)


@pytest.fixture(scope="session")
def embeddings_path(data_dir):
    path = data_dir / "embeddings.sgem"
    save_embeddings(build_store(), path)
    return path


@pytest.fixture(scope="session")
def store(embeddings_path):
    return load_embeddings(embeddings_path)


@pytest.fixture(scope="session")
def ones_caption_path(data_dir):
    path = data_dir / "embeddings_ones_captions.sgem"
    save_embeddings(build_store(ones_caption_embed()), path)
    return path
