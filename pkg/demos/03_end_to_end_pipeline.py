"""
From raw corpus to evaluation report via the command line
=========================================================

Builds a three-paper corpus and a matching embedding file in a scratch
directory, then drives the full CLI: ingest -> score -> eval. Every
command writes a manifest next to its output, so a run can be replayed.

Run with: python3 demos/03_end_to_end_pipeline.py
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from gareco import EmbeddingStore, save_embeddings

workdir = Path(tempfile.mkdtemp(prefix="gareco_demo_"))
print(f"working in {workdir}\n")

# --- a tiny corpus: two test papers to query, one train paper ----------
papers = [
    {
        "paper_id": "demo1",
        "title": "Picking Summary Figures Automatically",
        "abstract": "We rank a paper's own figures to find its best summary figure.",
        "primary_category": "cs.CV",
        "split": "test",
        "figures": [
            {"figure_id": "f1", "caption": "Figure 1: Data pipeline."},
            {"figure_id": "f2", "caption": "Figure 2: Overview of the ranking method."},
            {"figure_id": "f3", "caption": "Figure 3: Ablations."},
        ],
        "ga": {"ga_figure_id": "f2", "ga_type": "Reuse", "component_figure_ids": ["f2"]},
    },
    {
        "paper_id": "demo2",
        "title": "Contrast Is All You Align",
        "abstract": "Contrastive alignment of abstracts and figures.",
        "primary_category": "cs.LG",
        "split": "test",
        "figures": [
            {"figure_id": "f1", "caption": "Figure 1: Loss curve."},
            {"figure_id": "f2", "caption": "Figure 2: Alignment overview."},
        ],
        "ga": {"ga_figure_id": "f2", "ga_type": "Original", "component_figure_ids": []},
    },
    {
        "paper_id": "demo3",
        "title": "A Reference Paper",
        "abstract": "Held in the train split as an inter-paper reference.",
        "primary_category": "cs.CV",
        "split": "train",
        "figures": [{"figure_id": "f1", "caption": "Figure 1: Reference design."}],
        "ga": {"ga_figure_id": "f1", "ga_type": "Reuse", "component_figure_ids": ["f1"]},
    },
]
raw = workdir / "corpus_raw.jsonl"
raw.write_text("".join(json.dumps(p) + "\n" for p in papers), encoding="utf-8")

# --- hand-placed 4-dim embeddings; each abstract points at its GA ------
rng = np.random.default_rng(11)
store = EmbeddingStore(4)
vectors = {
    "abstract:demo1": [1.0, 0.2, 0.0, 0.1],
    "figure:demo1/f1": [0.0, 1.0, 0.3, 0.0],
    "figure:demo1/f2": [0.9, 0.3, 0.0, 0.2],
    "figure:demo1/f3": [0.1, 0.0, 1.0, 0.4],
    "abstract:demo2": [0.0, 1.0, 0.5, 0.0],
    "figure:demo2/f1": [0.7, 0.0, 0.1, 1.0],
    "figure:demo2/f2": [0.1, 0.9, 0.6, 0.0],
    "abstract:demo3": [0.5, 0.5, 0.5, 0.5],
    "ga:demo3": [0.4, 0.3, 0.2, 0.6],
}
for key, vec in vectors.items():
    store.add(key, vec)
embeds = workdir / "embeddings.sgem"
save_embeddings(store, embeds)


def cli(*args):
    cmd = [sys.executable, "-m", "gareco", *args]
    print("$ gareco " + " ".join(args))
    out = subprocess.run(cmd, capture_output=True, text=True, check=True)
    if out.stdout.strip():
        print(out.stdout.strip())
    print()


corpus = workdir / "corpus.jsonl"
cli("ingest", str(raw), str(corpus))

scores = workdir / "scores_abs2fig.csv"
cli("score", "--task", "intra", "--method", "abs2fig",
    "--corpus", str(corpus), "--embeddings", str(embeds), "--out", str(scores))
print(scores.read_text().strip(), "\n")

evaldir = workdir / "eval"
cli("eval", "--task", "intra", "--scores", str(scores),
    "--corpus", str(corpus), "--out-dir", str(evaldir))

report = json.loads((evaldir / "aggregate_alpha0.5.json").read_text())
print("aggregate metrics:")
for key, value in report["aggregates"].items():
    print(f"  {key}: {value}")

manifest = json.loads((scores.parent / "scores_abs2fig.csv.manifest.json").read_text())
print("\nscore manifest records inputs by content hash:")
for path, digest in manifest["inputs"].items():
    print(f"  {Path(path).name}: {digest[:16]}...")
