"""Command-line entry points: ingest, stats, score, eval, train.

Every run is reproducible: seeds are explicit, outputs are byte-deterministic
given identical inputs and flags, and each scoring/evaluation/training run
writes a manifest (command, config, seeds, input digests, version) next to
its outputs. Only the manifest's timestamp varies between identical runs.

Exit codes: 0 success, 1 internal error, 2 input validation, 3 missing
embedding.
"""

from __future__ import annotations

import csv
import datetime
import functools
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import __version__
from .contrastive import TrainConfig, load_adapter, save_adapter, train_adapter
from .corpus import SPLITS, GtPolicy, compute_stats, ground_truth_set, load_corpus, save_corpus
from .embeddings import load_embeddings
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
from .inter_metrics import aggregate_inter, inter_row
from .metrics import CarConfig, aggregate_intra, intra_row
from .retrieval import (
    METHODS,
    TASKS,
    MethodConfig,
    build_candidates,
    build_cider_idf,
    read_scores,
    reference_pool,
    score_candidates,
    write_scores,
)

log = logging.getLogger("gareco")

EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_MISSING_EMBEDDING = 3

GT_POLICIES = [p.value for p in GtPolicy]


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MissingEmbeddingError as e:
            click.echo(f"error: missing embedding for key '{e.key}'", err=True)
            sys.exit(EXIT_MISSING_EMBEDDING)
        except CorpusValidationError as e:
            click.echo(f"error: corpus validation failed ({len(e.errors)} problems):", err=True)
            for msg in e.errors:
                click.echo(f"  {msg}", err=True)
            sys.exit(EXIT_VALIDATION)
        except (EmbeddingFormatError, ZeroNormError, NoGroundTruthError,
                UnbalancedTokenError, DimensionMismatchError, ValueError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_VALIDATION)
        except GarecoError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INTERNAL)
    return wrapper


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(path, command: str, config: dict, inputs: list, seeds: dict) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs if p is not None},
        "seeds": seeds,
        "version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fmt(x) -> str:
    return repr(float(x))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="gareco")
@click.option("--verbose", is_flag=True, help="debug-level logging")
def main(verbose):
    """Figure-recommendation toolkit: corpus handling, scoring, and evaluation."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False, writable=True))
@handle_errors
def ingest(input_path, output_path):
    """Validate a corpus file and write its normalized one-record-per-line form."""
    corpus = load_corpus(input_path)
    save_corpus(corpus, output_path)
    _write_manifest(output_path + ".manifest.json", "ingest",
                    {"input": input_path}, [input_path], {})
    per_split = {name: len(corpus.split(name)) for name in SPLITS}
    unlabeled = sum(1 for p in corpus if p.ga is None and p.teaser_figure_id is None)
    click.echo(f"{len(corpus)} papers "
               + " ".join(f"{k}={v}" for k, v in per_split.items())
               + f"; {unlabeled} without GA or teaser")


@main.command()
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--split", type=click.Choice(SPLITS), default=None, help="restrict to one split")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="write JSON here instead of stdout")
@handle_errors
def stats(corpus_path, split, out_path):
    """Corpus summary statistics as JSON."""
    corpus = load_corpus(corpus_path)
    payload = json.dumps(compute_stats(corpus, split).to_dict(), indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(payload + "\n", encoding="utf-8")
    else:
        click.echo(payload)


@main.command()
@click.option("--task", type=click.Choice(TASKS), required=True)
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="embedding file (required for abs2fig methods)")
@click.option("--adapter", "adapter_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="linear adapter applied to image vectors")
@click.option("--split", type=click.Choice(SPLITS), default="test", help="query split")
@click.option("--reference-split", type=click.Choice(SPLITS), default="train",
              help="candidate pool split for the inter task")
@click.option("--gt-policy", type=click.Choice(GT_POLICIES), default="ga-only")
@click.option("--seed", type=int, default=None, help="required for method random")
@click.option("--lexical-subfigures/--no-lexical-subfigures", default=True,
              help="let subfigure captions join lexical max-aggregation")
@click.option("--jobs", type=int, default=None, help="parallel scoring workers")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, writable=True), required=True)
@handle_errors
def score(task, method, corpus_path, embeddings_path, adapter_path, split,
          reference_split, gt_policy, seed, lexical_subfigures, jobs, out_path):
    """Rank candidates for every query paper in a split; write a score CSV."""
    if method in ("abs2fig", "abs2fig-cap") and embeddings_path is None:
        raise click.UsageError(f"--embeddings is required for method {method}")
    if method == "random" and seed is None:
        raise click.UsageError("--seed is required for method random")
    corpus = load_corpus(corpus_path)
    store = load_embeddings(embeddings_path) if embeddings_path else None
    adapter = load_adapter(adapter_path).matrix if adapter_path else None
    config = MethodConfig(method, seed, adapter, lexical_subfigures)
    policy = GtPolicy(gt_policy)

    csets = []
    skipped = 0
    for paper in corpus:
        if paper.split != split:
            continue
        if task == "intra":
            try:
                csets.append(build_candidates(corpus, paper.paper_id, task, gt_policy=policy))
            except NoGroundTruthError:
                skipped += 1
        else:
            csets.append(build_candidates(corpus, paper.paper_id, task, reference_split))
    if skipped:
        log.info("skipped %d %s-split papers without ground truth", skipped, split)

    idf = None
    if method == "abs2cap-cider":
        if task == "intra":
            pool = [c for cset in csets for c in cset.candidates]
        else:
            pool = reference_pool(corpus, reference_split)
        idf = build_cider_idf(pool, lexical_subfigures)

    def score_one(cset):
        return score_candidates(config, cset, corpus, store, idf)

    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(csets) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool_exec:
            ranked_lists = list(pool_exec.map(score_one, csets))
    else:
        ranked_lists = [score_one(c) for c in csets]

    write_scores(ranked_lists, out_path)
    unscored = sum(r.unscored for r in ranked_lists)
    if unscored:
        log.info("%d candidates had no usable score and rank last", unscored)
    _write_manifest(
        out_path + ".manifest.json", "score",
        {"task": task, "method": method, "corpus": corpus_path,
         "embeddings": embeddings_path, "adapter": adapter_path, "split": split,
         "reference_split": reference_split, "gt_policy": gt_policy,
         "lexical_subfigures": lexical_subfigures},
        [corpus_path, embeddings_path, adapter_path],
        {} if seed is None else {"seed": seed},
    )
    click.echo(f"{len(ranked_lists)} queries scored -> {out_path}")


def _parse_k_list(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.UsageError(f"--k expects comma-separated integers, got '{text}'")
    if not ks or any(k < 1 for k in ks):
        raise click.UsageError(f"--k values must be positive, got '{text}'")
    return ks


def _eval_intra(corpus, ranked_lists, ks, car_k, alphas, zscore_scope, policy, out_dir):
    gts = {}
    for ranked in ranked_lists:
        paper = corpus.get(ranked.query_paper_id)
        gts[ranked.query_paper_id] = ground_truth_set(paper, policy)

    for alpha in alphas:
        config = CarConfig(car_k, alpha, zscore_scope)
        rows = [intra_row(r, gts[r.query_paper_id], ks, config) for r in ranked_lists]
        report = aggregate_intra(rows)
        tag = f"alpha{_fmt(alpha)}"

        header = (["query_id"] + [f"r_at_{k}" for k in ks]
                  + ["mrr", f"ndcg_at_{car_k}", f"car_at_{car_k}",
                     "car_ratio", "car_confidence", "car_entropy", "gt_in_top_k"])
        with open(out_dir / f"per_query_{tag}.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in report.rows:
                writer.writerow(
                    [row.query_id] + [row.recalls[k] for k in ks]
                    + [_fmt(row.mrr), _fmt(row.ndcg), _fmt(row.car.car),
                       _fmt(row.car.ratio), _fmt(row.car.confidence), _fmt(row.car.entropy),
                       "true" if row.car.gt_in_top_k else "false"])

        agg = dict(report.aggregates)
        agg[f"ndcg_at_{car_k}"] = agg.pop("ndcg")
        agg[f"car_at_{car_k}"] = agg.pop("car")
        payload = {
            "aggregates": agg,
            "histogram": [{"lo": lo, "hi": hi, "count": n} for lo, hi, n in report.histogram],
            "alpha": alpha,
            "k": car_k,
        }
        (out_dir / f"aggregate_{tag}.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")

        with open(out_dir / f"car_hist_{tag}.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, count in report.histogram:
                writer.writerow([_fmt(lo), _fmt(hi), count])
        click.echo(f"alpha={_fmt(alpha)}: car_at_{car_k}={_fmt(agg[f'car_at_{car_k}'])} "
                   f"over {agg['queries']} queries")


def _eval_inter(corpus, store, ranked_lists, inter_k, clip_weight, clip_clamp, out_dir):
    rows = [inter_row(corpus, store, r, inter_k, clip_weight, clip_clamp) for r in ranked_lists]
    report = aggregate_inter(rows, inter_k)
    if report.ga2ga_skipped:
        log.info("%d queries lack an own-GA embedding; GA-to-GA stats skipped for them",
                 report.ga2ga_skipped)

    header = ["query_id", f"field_p_at_{inter_k}",
              f"abs2abs_mean_{inter_k}", f"abs2abs_std_{inter_k}",
              f"ga2ga_mean_{inter_k}", f"ga2ga_std_{inter_k}"]
    with open(out_dir / "per_query.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in report.rows:
            writer.writerow([
                row.query_id, _fmt(row.field_p), _fmt(row.abs2abs_mean), _fmt(row.abs2abs_std),
                "" if row.ga2ga_mean is None else _fmt(row.ga2ga_mean),
                "" if row.ga2ga_std is None else _fmt(row.ga2ga_std)])

    payload = {"aggregates": report.aggregates, "k": inter_k,
               "ga2ga_skipped": report.ga2ga_skipped}
    (out_dir / "aggregate.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"field_p_at_{inter_k}={_fmt(report.aggregates['field_p'])} "
               f"over {report.aggregates['queries']} queries")


@main.command(name="eval")
@click.option("--task", type=click.Choice(TASKS), required=True)
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="required for the inter task")
@click.option("--k", "k_list", default="1,5,10", show_default=True,
              help="comma-separated recall cutoffs (intra)")
@click.option("--car-k", type=int, default=5, show_default=True,
              help="k for the confidence-adjusted ratio and nDCG (intra)")
@click.option("--inter-k", type=int, default=5, show_default=True,
              help="cutoff for inter metrics")
@click.option("--alpha", "alphas", type=float, multiple=True, default=(0.5,), show_default=True,
              help="confidence threshold fraction; repeat for a sweep")
@click.option("--zscore-scope", type=click.Choice(["topk", "full"]), default="topk", show_default=True,
              help="standardize over the top-k scores or the full list")
@click.option("--gt-policy", type=click.Choice(GT_POLICIES), default="ga-only")
@click.option("--clip-weight", type=float, default=2.5, show_default=True)
@click.option("--clip-clamp/--no-clip-clamp", default=True,
              help="clamp negative cosine in the GA-to-GA score")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@handle_errors
def eval_cmd(task, scores_path, corpus_path, embeddings_path, k_list, car_k, inter_k,
             alphas, zscore_scope, gt_policy, clip_weight, clip_clamp, out_dir):
    """Evaluate a score CSV: per-query rows, aggregates, and histogram files."""
    ks = _parse_k_list(k_list)
    if car_k < 1:
        raise click.UsageError("--car-k must be positive")
    if task == "inter" and embeddings_path is None:
        raise click.UsageError("--embeddings is required for inter evaluation")
    corpus = load_corpus(corpus_path)
    ranked_lists = read_scores(scores_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if task == "intra":
        _eval_intra(corpus, ranked_lists, ks, car_k, alphas, zscore_scope,
                    GtPolicy(gt_policy), out)
    else:
        store = load_embeddings(embeddings_path)
        _eval_inter(corpus, store, ranked_lists, inter_k, clip_weight, clip_clamp, out)

    _write_manifest(
        out / "manifest.json", "eval",
        {"task": task, "scores": scores_path, "corpus": corpus_path,
         "embeddings": embeddings_path, "k": ks, "car_k": car_k, "inter_k": inter_k,
         "alpha": list(alphas), "zscore_scope": zscore_scope, "gt_policy": gt_policy,
         "clip_weight": clip_weight, "clip_clamp": clip_clamp},
        [scores_path, corpus_path, embeddings_path],
        {},
    )


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--objective", type=click.Choice(["intra", "inter"]), default="intra", show_default=True)
@click.option("--fusion/--no-fusion", default=False,
              help="multiply image vectors with caption vectors before similarity")
@click.option("-m", "m", type=int, default=4, show_default=True,
              help="negative figures sampled per paper")
@click.option("--batch-size", type=int, default=8, show_default=True)
@click.option("--steps", type=int, default=200, show_default=True)
@click.option("--lr", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tau", type=float, default=0.07, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@handle_errors
def train(corpus_path, embeddings_path, objective, fusion, m, batch_size, steps,
          lr, seed, tau, out_dir):
    """Fit a linear image-side adapter by gradient descent; write adapter + trace."""
    corpus = load_corpus(corpus_path)
    store = load_embeddings(embeddings_path)
    config = TrainConfig(m=m, batch_size=batch_size, steps=steps, lr=lr, seed=seed, tau=tau)
    adapter, trace = train_adapter(corpus, store, config, objective, fusion)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_adapter(adapter, out / "adapter.sgem")
    with open(out / "trace.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss"])
        for step, loss in enumerate(trace):
            writer.writerow([step, _fmt(loss)])
    _write_manifest(
        out / "manifest.json", "train",
        {"corpus": corpus_path, "embeddings": embeddings_path, "objective": objective,
         "fusion": fusion, "m": m, "batch_size": batch_size, "steps": steps,
         "lr": lr, "tau": tau},
        [corpus_path, embeddings_path],
        {"seed": seed},
    )
    if trace:
        click.echo(f"{len(trace)} steps; loss {_fmt(trace[0])} -> {_fmt(trace[-1])}")
    else:
        click.echo("0 steps; adapter is the identity")


if __name__ == "__main__":
    main()
