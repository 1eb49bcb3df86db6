"""Paper corpus: loading, validation, text cleanup, ground truth, and stats.

The on-disk canonical form is UTF-8 newline-delimited JSON, one paper per
line. A whole-file JSON array (the nested ingest form) is also accepted and
normalized on load. Unknown fields are preserved field-for-field through a
load/save round trip.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorpusValidationError, NoGroundTruthError, UnbalancedTokenError

SPLITS = ("train", "val", "test")
GA_TYPES = ("Original", "Reuse", "Modified")


@dataclass
class SubfigureRecord:
    subfigure_id: str
    caption: str
    extra: dict = field(default_factory=dict)


@dataclass
class FigureRecord:
    figure_id: str
    caption: str
    subfigures: list[SubfigureRecord] = field(default_factory=list)
    is_ga_component: bool = False
    extra: dict = field(default_factory=dict)


@dataclass
class GaRecord:
    ga_figure_id: str
    ga_type: str
    component_figure_ids: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass
class PaperRecord:
    paper_id: str
    title: str
    abstract: str
    primary_category: str
    split: str
    figures: list[FigureRecord] = field(default_factory=list)
    ga: GaRecord | None = None
    teaser_figure_id: str | None = None
    extra: dict = field(default_factory=dict)

    def figure(self, figure_id: str) -> FigureRecord:
        for fig in self.figures:
            if fig.figure_id == figure_id:
                return fig
        raise KeyError(f"paper '{self.paper_id}' has no figure '{figure_id}'")


class GtPolicy(enum.Enum):
    """How a paper's GA annotations map to ground-truth figure ids."""

    GA_ONLY = "ga-only"
    COMPONENTS = "components"
    TEASER_FALLBACK = "teaser-fallback"


class Corpus:
    """Immutable, insertion-ordered collection of validated papers."""

    def __init__(self, papers: list[PaperRecord]):
        self._papers = list(papers)
        self._by_id = {p.paper_id: p for p in self._papers}

    def __len__(self):
        return len(self._papers)

    def __iter__(self):
        return iter(self._papers)

    def __contains__(self, paper_id):
        return paper_id in self._by_id

    def get(self, paper_id: str) -> PaperRecord:
        try:
            return self._by_id[paper_id]
        except KeyError:
            raise KeyError(f"unknown paper_id '{paper_id}'") from None

    def split(self, name: str) -> list[PaperRecord]:
        if name not in SPLITS:
            raise ValueError(f"unknown split '{name}' (expected one of {SPLITS})")
        return [p for p in self._papers if p.split == name]


# Leading figure tags: "Figure 1", "Fig. 2a", "FIG 3", optionally followed by
# ":", ".", or whitespace. Stripped to a fixpoint so the operation is idempotent.
_CAPTION_TAG_RE = re.compile(r"^\s*(?:figure|fig\.?)\s*\d+[a-z]?\s*[:.]?\s*", re.IGNORECASE)


def strip_caption_tags(caption: str) -> str:
    """Remove leading figure-number tags ("Figure 1:", "Fig. 2a.", ...)."""
    prev = None
    while prev != caption:
        prev = caption
        caption = _CAPTION_TAG_RE.sub("", caption)
    return caption


_SPECIAL_TOKEN_RE = re.compile(r"</?(MATH|NOTE|TAG)>")


def strip_special_tokens(text: str, mode: str = "drop") -> str:
    """Remove <MATH>/<NOTE>/<TAG> spans.

    mode="drop" removes the span including delimiters; mode="keep-content"
    removes only the delimiters. Unbalanced delimiters raise
    UnbalancedTokenError naming the offending token.
    """
    if mode not in ("drop", "keep-content"):
        raise ValueError(f"unknown mode '{mode}' (expected 'drop' or 'keep-content')")
    out = []
    stack: list[str] = []
    pos = 0
    for m in _SPECIAL_TOKEN_RE.finditer(text):
        segment = text[pos:m.start()]
        if mode == "keep-content" or not stack:
            out.append(segment)
        pos = m.end()
        token = m.group(1)
        if m.group(0).startswith("</"):
            if not stack or stack[-1] != token:
                raise UnbalancedTokenError(f"unbalanced closing token </{token}>")
            stack.pop()
        else:
            stack.append(token)
    if stack:
        raise UnbalancedTokenError(f"unbalanced opening token <{stack[-1]}>")
    out.append(text[pos:])
    return "".join(out)


_MISSING = object()


def _expect(obj, key, types, label, errors):
    value = obj.get(key, _MISSING)
    if value is _MISSING:
        errors.append(f"{label}: missing field '{key}'")
        return None
    if not isinstance(value, types):
        type_names = getattr(types, "__name__", None) or "/".join(t.__name__ for t in types)
        errors.append(f"{label}: field '{key}' must be {type_names}")
        return None
    return value


_PAPER_FIELDS = ("paper_id", "title", "abstract", "primary_category", "split",
                 "figures", "ga", "teaser_figure_id")
_FIGURE_FIELDS = ("figure_id", "caption", "subfigures", "is_ga_component")
_SUBFIGURE_FIELDS = ("subfigure_id", "caption")
_GA_FIELDS = ("ga_figure_id", "ga_type", "component_figure_ids")


def _parse_figure(obj, label, errors) -> FigureRecord | None:
    if not isinstance(obj, dict):
        errors.append(f"{label}: figure entry must be an object")
        return None
    figure_id = _expect(obj, "figure_id", str, label, errors)
    caption = _expect(obj, "caption", str, label, errors)
    is_ga_component = bool(obj.get("is_ga_component", False))
    subfigures = []
    sub_raw = obj.get("subfigures", [])
    if not isinstance(sub_raw, list):
        errors.append(f"{label}: field 'subfigures' must be a list")
        sub_raw = []
    seen_sub = set()
    for sub in sub_raw:
        if not isinstance(sub, dict):
            errors.append(f"{label}: subfigure entry must be an object")
            continue
        sid = _expect(sub, "subfigure_id", str, label, errors)
        scap = _expect(sub, "caption", str, label, errors)
        if sid is None or scap is None:
            continue
        if sid in seen_sub:
            errors.append(f"{label}: duplicate subfigure_id '{sid}'")
            continue
        seen_sub.add(sid)
        extra = {k: v for k, v in sub.items() if k not in _SUBFIGURE_FIELDS}
        subfigures.append(SubfigureRecord(sid, scap, extra))
    if figure_id is None or caption is None:
        return None
    extra = {k: v for k, v in obj.items() if k not in _FIGURE_FIELDS}
    return FigureRecord(figure_id, caption, subfigures, is_ga_component, extra)


def _parse_record(obj, label, errors) -> PaperRecord | None:
    if not isinstance(obj, dict):
        errors.append(f"{label}: record must be an object")
        return None
    n_before = len(errors)
    paper_id = _expect(obj, "paper_id", str, label, errors)
    if paper_id:
        label = f"{label} (paper_id={paper_id})"
    title = _expect(obj, "title", str, label, errors)
    abstract = _expect(obj, "abstract", str, label, errors)
    category = _expect(obj, "primary_category", str, label, errors)
    split = _expect(obj, "split", str, label, errors)
    if split is not None and split not in SPLITS:
        errors.append(f"{label}: unknown split '{split}' (expected one of {SPLITS})")

    figures = []
    fig_raw = obj.get("figures", [])
    if not isinstance(fig_raw, list):
        errors.append(f"{label}: field 'figures' must be a list")
        fig_raw = []
    figure_ids = set()
    for fig_obj in fig_raw:
        fig = _parse_figure(fig_obj, label, errors)
        if fig is None:
            continue
        if fig.figure_id in figure_ids:
            errors.append(f"{label}: duplicate figure_id '{fig.figure_id}'")
            continue
        figure_ids.add(fig.figure_id)
        figures.append(fig)

    ga = None
    ga_raw = obj.get("ga")
    if ga_raw is not None:
        if not isinstance(ga_raw, dict):
            errors.append(f"{label}: field 'ga' must be an object or null")
        else:
            ga_fid = _expect(ga_raw, "ga_figure_id", str, label, errors)
            ga_type = _expect(ga_raw, "ga_type", str, label, errors)
            comp = ga_raw.get("component_figure_ids", [])
            if not isinstance(comp, list) or not all(isinstance(c, str) for c in comp):
                errors.append(f"{label}: field 'component_figure_ids' must be a list of strings")
                comp = []
            if ga_type is not None and ga_type not in GA_TYPES:
                errors.append(f"{label}: unknown ga_type '{ga_type}' (expected one of {GA_TYPES})")
            if ga_type == "Reuse" and len(comp) != 1:
                errors.append(f"{label}: ga_type 'Reuse' requires exactly one component figure id, got {len(comp)}")
            if ga_fid is not None and ga_fid not in figure_ids:
                errors.append(f"{label}: ga_figure_id '{ga_fid}' names no figure of this paper")
            for cid in comp:
                if cid not in figure_ids:
                    errors.append(f"{label}: GA component '{cid}' names no figure of this paper")
            if ga_fid is not None and ga_type is not None:
                extra = {k: v for k, v in ga_raw.items() if k not in _GA_FIELDS}
                ga = GaRecord(ga_fid, ga_type, list(comp), extra)

    teaser = obj.get("teaser_figure_id")
    if teaser is not None:
        if not isinstance(teaser, str):
            errors.append(f"{label}: field 'teaser_figure_id' must be a string or null")
            teaser = None
        elif teaser not in figure_ids:
            errors.append(f"{label}: teaser_figure_id '{teaser}' names no figure of this paper")

    if len(errors) > n_before:
        return None
    extra = {k: v for k, v in obj.items() if k not in _PAPER_FIELDS}
    return PaperRecord(paper_id, title, abstract, category, split, figures, ga, teaser, extra)


def load_corpus(path) -> Corpus:
    """Load and validate a corpus file (JSONL, or a whole-file JSON array).

    Raises CorpusValidationError listing every offending record on failure.
    """
    text = Path(path).read_text(encoding="utf-8")
    errors: list[str] = []
    raw: list[tuple[str, dict]] = []
    if text.lstrip().startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise CorpusValidationError([f"file: invalid JSON ({e})"]) from None
        raw = [(f"record {i + 1}", obj) for i, obj in enumerate(data)]
    else:
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                raw.append((f"line {lineno}", json.loads(line)))
            except json.JSONDecodeError as e:
                errors.append(f"line {lineno}: invalid JSON ({e.msg} at column {e.colno})")

    papers: list[PaperRecord] = []
    seen_ids: set[str] = set()
    for label, obj in raw:
        rec = _parse_record(obj, label, errors)
        if rec is None:
            continue
        if rec.paper_id in seen_ids:
            errors.append(f"{label}: duplicate paper_id '{rec.paper_id}'")
            continue
        seen_ids.add(rec.paper_id)
        papers.append(rec)
    if errors:
        raise CorpusValidationError(errors)
    return Corpus(papers)


def _subfigure_to_obj(sub: SubfigureRecord) -> dict:
    obj = {"subfigure_id": sub.subfigure_id, "caption": sub.caption}
    obj.update(sub.extra)
    return obj


def _figure_to_obj(fig: FigureRecord) -> dict:
    obj = {
        "figure_id": fig.figure_id,
        "caption": fig.caption,
        "subfigures": [_subfigure_to_obj(s) for s in fig.subfigures],
        "is_ga_component": fig.is_ga_component,
    }
    obj.update(fig.extra)
    return obj


def record_to_obj(paper: PaperRecord) -> dict:
    ga = None
    if paper.ga is not None:
        ga = {
            "ga_figure_id": paper.ga.ga_figure_id,
            "ga_type": paper.ga.ga_type,
            "component_figure_ids": list(paper.ga.component_figure_ids),
        }
        ga.update(paper.ga.extra)
    obj = {
        "paper_id": paper.paper_id,
        "title": paper.title,
        "abstract": paper.abstract,
        "primary_category": paper.primary_category,
        "split": paper.split,
        "figures": [_figure_to_obj(f) for f in paper.figures],
        "ga": ga,
        "teaser_figure_id": paper.teaser_figure_id,
    }
    obj.update(paper.extra)
    return obj


def save_corpus(corpus: Corpus, path) -> None:
    """Write the canonical newline-delimited form (deterministic byte-for-byte)."""
    with open(path, "w", encoding="utf-8") as fh:
        for paper in corpus:
            fh.write(json.dumps(record_to_obj(paper), ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


@dataclass
class TokenSummary:
    count: int
    mean: float
    std: float
    max: int

    def to_dict(self):
        return {"count": self.count, "mean": self.mean, "std": self.std, "max": self.max}


@dataclass
class CorpusStats:
    papers: int
    category_counts: dict[str, int]
    title_tokens: TokenSummary
    abstract_tokens: TokenSummary
    caption_tokens: TokenSummary
    figures_per_paper: TokenSummary
    figures_per_paper_with_subfigures: TokenSummary

    def to_dict(self):
        return {
            "papers": self.papers,
            "category_counts": dict(self.category_counts),
            "title_tokens": self.title_tokens.to_dict(),
            "abstract_tokens": self.abstract_tokens.to_dict(),
            "caption_tokens": self.caption_tokens.to_dict(),
            "figures_per_paper": self.figures_per_paper.to_dict(),
            "figures_per_paper_with_subfigures": self.figures_per_paper_with_subfigures.to_dict(),
        }


def _token_count(text: str) -> int:
    # whitespace split after special-token drop; reproducible and dependency-free
    return len(strip_special_tokens(text, "drop").split())


def _summarize(values) -> TokenSummary:
    if not values:
        return TokenSummary(0, 0.0, 0.0, 0)
    arr = np.asarray(values, dtype=np.float64)
    return TokenSummary(len(values), float(arr.mean()), float(arr.std()), int(arr.max()))


def compute_stats(corpus: Corpus, split: str | None = None) -> CorpusStats:
    """Deterministic corpus summary, optionally restricted to one split.

    A figure with subfigures counts as its panels in the with-subfigures
    figure count (n panels replace the single parent).
    """
    papers = list(corpus) if split is None else corpus.split(split)
    categories: dict[str, int] = {}
    titles, abstracts, captions, figs, figs_sub = [], [], [], [], []
    for paper in papers:
        categories[paper.primary_category] = categories.get(paper.primary_category, 0) + 1
        titles.append(_token_count(paper.title))
        abstracts.append(_token_count(paper.abstract))
        figs.append(len(paper.figures))
        figs_sub.append(sum(len(f.subfigures) if f.subfigures else 1 for f in paper.figures))
        for fig in paper.figures:
            captions.append(_token_count(fig.caption))
    return CorpusStats(
        papers=len(papers),
        category_counts=categories,
        title_tokens=_summarize(titles),
        abstract_tokens=_summarize(abstracts),
        caption_tokens=_summarize(captions),
        figures_per_paper=_summarize(figs),
        figures_per_paper_with_subfigures=_summarize(figs_sub),
    )


def ground_truth_set(paper: PaperRecord, policy: GtPolicy = GtPolicy.GA_ONLY) -> set[str]:
    """Ground-truth figure ids for a paper under the given policy.

    Never returns an empty set; raises NoGroundTruthError when the paper
    lacks the required annotation.
    """
    policy = GtPolicy(policy)
    if policy is GtPolicy.GA_ONLY:
        if paper.ga is None:
            raise NoGroundTruthError(f"paper '{paper.paper_id}' has no GA annotation")
        return {paper.ga.ga_figure_id}
    if policy is GtPolicy.COMPONENTS:
        if paper.ga is None:
            raise NoGroundTruthError(f"paper '{paper.paper_id}' has no GA annotation")
        if paper.ga.component_figure_ids:
            return set(paper.ga.component_figure_ids)
        return {paper.ga.ga_figure_id}
    # teaser-fallback
    if paper.ga is not None:
        return {paper.ga.ga_figure_id}
    if paper.teaser_figure_id is not None:
        return {paper.teaser_figure_id}
    raise NoGroundTruthError(f"paper '{paper.paper_id}' has neither GA nor teaser annotation")
