import json

import numpy as np
import pytest

from gareco import (
    Corpus,
    CorpusValidationError,
    FigureRecord,
    GtPolicy,
    NoGroundTruthError,
    PaperRecord,
    SubfigureRecord,
    UnbalancedTokenError,
    compute_stats,
    ground_truth_set,
    load_corpus,
    save_corpus,
    strip_caption_tags,
    strip_special_tokens,
)
from gareco.corpus import record_to_obj

from conftest import FIXTURE_PAPERS, write_corpus_file


def test_load_counts_and_lookup(corpus):
    assert len(corpus) == 6
    assert corpus.get("p1").title == "Ranking Figures for Visual Paper Summaries"
    assert [p.paper_id for p in corpus.split("test")] == ["p1", "p2"]
    assert [p.paper_id for p in corpus.split("train")] == ["p3", "p4", "p5"]
    assert [p.paper_id for p in corpus.split("val")] == ["p6"]
    with pytest.raises(KeyError):
        corpus.get("nope")
    with pytest.raises(ValueError):
        corpus.split("dev")


def test_unknown_fields_survive(corpus):
    p1 = corpus.get("p1")
    assert p1.extra["authors"] == ["A. Author", "B. Writer"]
    assert p1.figures[2].extra["page"] == 7
    assert p1.ga.extra["annotator"] == "rater-3"


def test_round_trip_identical(corpus, corpus_path, tmp_path):
    out = tmp_path / "normalized.jsonl"
    save_corpus(corpus, out)
    again = load_corpus(out)
    assert len(again) == len(corpus)
    for a, b in zip(corpus, again):
        assert record_to_obj(a) == record_to_obj(b)
    # normalization is idempotent byte for byte
    out2 = tmp_path / "normalized2.jsonl"
    save_corpus(again, out2)
    assert out.read_bytes() == out2.read_bytes()


def test_json_array_ingest_matches_jsonl(corpus, tmp_path):
    path = tmp_path / "corpus.json"
    path.write_text(json.dumps(FIXTURE_PAPERS), encoding="utf-8")
    from_array = load_corpus(path)
    assert [record_to_obj(p) for p in from_array] == [record_to_obj(p) for p in corpus]


def _load_broken(tmp_path, mutate):
    papers = json.loads(json.dumps(FIXTURE_PAPERS))  # deep copy
    mutate(papers)
    path = tmp_path / "broken.jsonl"
    write_corpus_file(path, papers)
    with pytest.raises(CorpusValidationError) as exc:
        load_corpus(path)
    return exc.value


def test_duplicate_paper_id(tmp_path):
    err = _load_broken(tmp_path, lambda ps: ps[1].update(paper_id="p1"))
    assert any("duplicate paper_id 'p1'" in m for m in err.errors)


def test_unknown_split(tmp_path):
    err = _load_broken(tmp_path, lambda ps: ps[0].update(split="dev"))
    assert any("unknown split 'dev'" in m for m in err.errors)


def test_ga_referential_integrity(tmp_path):
    err = _load_broken(tmp_path, lambda ps: ps[0]["ga"].update(ga_figure_id="f9"))
    assert any("names no figure" in m for m in err.errors)


def test_reuse_needs_exactly_one_component(tmp_path):
    err = _load_broken(tmp_path, lambda ps: ps[0]["ga"].update(component_figure_ids=["f1", "f2"]))
    assert any("exactly one component" in m for m in err.errors)


def test_teaser_referential_integrity(tmp_path):
    err = _load_broken(tmp_path, lambda ps: ps[4].update(teaser_figure_id="f9"))
    assert any("teaser_figure_id 'f9'" in m for m in err.errors)


def test_duplicate_figure_and_subfigure_ids(tmp_path):
    def mutate(ps):
        ps[0]["figures"][1]["figure_id"] = "f1"
        ps[0]["figures"][2]["subfigures"][1]["subfigure_id"] = "s1"
    err = _load_broken(tmp_path, mutate)
    assert any("duplicate figure_id 'f1'" in m for m in err.errors)
    assert any("duplicate subfigure_id 's1'" in m for m in err.errors)


def test_all_errors_collected(tmp_path):
    def mutate(ps):
        ps[0]["split"] = "dev"
        ps[1]["ga"]["ga_type"] = "Copied"
        ps[2]["figures"][0].pop("caption")
    err = _load_broken(tmp_path, mutate)
    assert len(err.errors) >= 3


def test_parse_failure_names_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"paper_id": "x"\nnot json\n', encoding="utf-8")
    with pytest.raises(CorpusValidationError) as exc:
        load_corpus(path)
    assert any(m.startswith("line 1") for m in exc.value.errors)
    assert any(m.startswith("line 2") for m in exc.value.errors)


# tag variants x bodies, expected output known by construction
TAG_VARIANTS = [
    "Figure 1: ", "Figure 12. ", "figure 3 ", "Fig. 4: ", "Fig 5. ",
    "FIG. 2A: ", "fig.7b.", "  Figure 9:   ", "Fig 10 ", "FIGURE 2:",
]
BODIES = [
    "Overview of the model.",
    "Results on the held-out split.",
    "Ablation over temperature values.",
    "Qualitative examples.",
    "Architecture diagram with skip connections.",
]


def test_strip_caption_tags_fixture():
    for tag in TAG_VARIANTS:
        for body in BODIES:
            assert strip_caption_tags(tag + body) == body
    # untagged text and empty input pass through
    for body in BODIES:
        assert strip_caption_tags(body) == body
    assert strip_caption_tags("") == ""
    assert strip_caption_tags("(a) Panel caption.") == "(a) Panel caption."
    # mid-text mentions are not leading tags
    assert strip_caption_tags("See Figure 2 for details.") == "See Figure 2 for details."
    # stacked tags all peel off
    assert strip_caption_tags("Figure 1: Fig. 2: Overview.") == "Overview."


def test_strip_caption_tags_idempotent_fuzz():
    rng = np.random.default_rng(11)
    pieces = TAG_VARIANTS + BODIES + ["", " ", "fig", "1:", "Figure", "figure 1x2"]
    for _ in range(500):
        n = rng.integers(0, 4)
        text = "".join(rng.choice(pieces) for _ in range(n))
        once = strip_caption_tags(text)
        assert strip_caption_tags(once) == once


def test_strip_special_tokens():
    assert strip_special_tokens("loss <MATH>L_C</MATH> value", "drop") == "loss  value"
    assert strip_special_tokens("loss <MATH>L_C</MATH> value", "keep-content") == "loss L_C value"
    nested = "a <NOTE>b <MATH>c</MATH> d</NOTE> e"
    assert strip_special_tokens(nested, "drop") == "a  e"
    assert strip_special_tokens(nested, "keep-content") == "a b c d e"
    assert strip_special_tokens("plain", "drop") == "plain"
    with pytest.raises(UnbalancedTokenError, match="MATH"):
        strip_special_tokens("a <MATH>b", "drop")
    with pytest.raises(UnbalancedTokenError, match="TAG"):
        strip_special_tokens("a b</TAG>", "drop")
    with pytest.raises(UnbalancedTokenError):
        strip_special_tokens("<MATH>a</NOTE>", "keep-content")
    with pytest.raises(ValueError):
        strip_special_tokens("x", "elide")


def test_stats_single_paper_hand_count():
    paper = PaperRecord(
        paper_id="q1", title="Two word", abstract="three token abstract",
        primary_category="cs.CV", split="train",
        figures=[
            FigureRecord("f1", "one"),
            FigureRecord("f2", "two words"),
            FigureRecord("f3", "", subfigures=[
                SubfigureRecord("a", "x"), SubfigureRecord("b", "y z")]),
        ])
    stats = compute_stats(Corpus([paper]))
    assert stats.papers == 1
    assert stats.figures_per_paper.mean == 3.0
    assert stats.figures_per_paper_with_subfigures.mean == 4.0
    assert stats.title_tokens.mean == 2.0
    assert stats.abstract_tokens.mean == 3.0
    # captions: own captions only ("one", "two words", "") -> 1, 2, 0
    assert stats.caption_tokens.count == 3
    assert stats.caption_tokens.mean == 1.0
    assert stats.caption_tokens.max == 2


def test_stats_fixture_histogram(corpus):
    stats = compute_stats(corpus)
    assert stats.category_counts == {"cs.CV": 4, "cs.LG": 2}
    assert sum(stats.category_counts.values()) == stats.papers == 6
    # special tokens are dropped before counting
    assert stats.abstract_tokens.max == 37
    test_stats = compute_stats(corpus, "test")
    assert test_stats.papers == 2
    assert test_stats.category_counts == {"cs.CV": 2}
    assert test_stats.figures_per_paper.mean == 3.0
    assert test_stats.figures_per_paper_with_subfigures.mean == 3.5


def test_stats_empty_split():
    empty = Corpus([])
    stats = compute_stats(empty)
    assert stats.papers == 0
    assert stats.title_tokens.count == 0
    assert stats.title_tokens.mean == 0.0
    assert stats.title_tokens.std == 0.0


def test_stats_std_matches_population_formula(corpus):
    import oracles
    stats = compute_stats(corpus)
    counts = [len(strip_special_tokens(p.abstract, "drop").split()) for p in corpus]
    assert abs(stats.abstract_tokens.mean - oracles.mean(counts)) < 1e-12
    assert abs(stats.abstract_tokens.std - oracles.pstd(counts)) < 1e-12


def test_ground_truth_policies(corpus):
    p1 = corpus.get("p1")
    assert ground_truth_set(p1, GtPolicy.GA_ONLY) == {"f2"}
    assert ground_truth_set(p1, GtPolicy.COMPONENTS) == {"f2"}
    p4 = corpus.get("p4")
    assert ground_truth_set(p4, GtPolicy.COMPONENTS) == {"f1", "f2"}
    p2 = corpus.get("p2")
    # no components recorded: falls back to the GA figure itself
    assert ground_truth_set(p2, GtPolicy.COMPONENTS) == {"fGA"}
    p5 = corpus.get("p5")
    assert ground_truth_set(p5, GtPolicy.TEASER_FALLBACK) == {"f1"}
    with pytest.raises(NoGroundTruthError):
        ground_truth_set(p5, GtPolicy.GA_ONLY)
    bare = PaperRecord("x", "t", "a", "cs.CV", "train", figures=[FigureRecord("f1", "c")])
    with pytest.raises(NoGroundTruthError):
        ground_truth_set(bare, GtPolicy.TEASER_FALLBACK)


def test_ground_truth_never_empty(corpus):
    for paper in corpus:
        for policy in GtPolicy:
            try:
                gt = ground_truth_set(paper, policy)
            except NoGroundTruthError:
                continue
            assert gt
