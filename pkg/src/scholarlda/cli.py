"""Command-line front door: ingest -> train -> topics/trends/recommend/eval.

Stages communicate through files (corpus JSON, model JSON, CSV exports).
Exit codes: 0 success, 2 usage error, 3 data error, 4 internal invariant
violation. On failure a machine-readable JSON error record is printed to
stderr. Output files are written atomically; a failed command never leaves
a partial file behind.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import corpus as corpus_mod
from . import lda, recommend as recommend_mod, topics as topics_mod, trends as trends_mod
from .errors import (
    CountInvariantError,
    FingerprintMismatchError,
    ScholarLdaError,
    UnknownEntityError,
)
from ._fileio import atomic_write_text

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def _years_range(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            first, last = text.split("..", 1)
            years = (int(first), int(last))
        else:
            years = (int(text), int(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YEAR or FIRST..LAST, got {text!r}") from None
    if years[0] > years[1]:
        raise argparse.ArgumentTypeError(f"year range {text!r} is reversed")
    return years


def _topic_id_list(text: str) -> tuple[int, ...]:
    try:
        ids = tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated topic ids, got {text!r}") from None
    if not ids:
        raise argparse.ArgumentTypeError("target topic list is empty")
    return ids


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scholarlda",
        description="Mine scholarly corpora with collapsed-Gibbs LDA: topic summaries, venue trends, and topic-overlap recommendations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build an encoded corpus file from jsonl/csv records")
    p.add_argument("--input", required=True, help="records file (jsonl or csv)")
    p.add_argument("--input-format", choices=["jsonl", "csv"], help="override format inference")
    p.add_argument("--stoplist", default=None, metavar="PATH|none", help="stoplist file; default: bundled English list; 'none' disables")
    p.add_argument("--min-term-count", type=int, default=1, help="drop terms rarer than this (default 1: keep all)")
    p.add_argument("--vocab-from", metavar="CORPUS", help="encode against an existing corpus file's vocabulary (for held-out data)")
    p.add_argument("--out", required=True, help="corpus file to write")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train an LDA model on a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--topics", type=int, default=lda.Hyperparams.K, help="number of topics K (default 100)")
    p.add_argument("--alpha", type=float, default=lda.Hyperparams.alpha, help="document-topic prior (default 0.01)")
    p.add_argument("--beta", type=float, default=lda.Hyperparams.beta, help="topic-word prior (default 0.01)")
    p.add_argument("--iterations", type=int, default=lda.Hyperparams.iterations)
    p.add_argument("--burn-in", type=int, default=lda.Hyperparams.burn_in)
    p.add_argument("--seed", type=int, default=lda.Hyperparams.seed)
    p.add_argument("--log-interval", type=int, default=10, help="sweeps between progress lines (0 silences)")
    p.add_argument("--chains", type=int, default=1, help="independent chains; the best final log-likelihood wins")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("topics", help="export ranked topic-word summaries")
    _add_model_corpus(p)
    p.add_argument("--words", type=int, default=20, help="words per topic (default 20)")
    p.add_argument("--topic", type=int, help="only this topic id")
    p.add_argument("--venue", help="rank topics by prevalence within this venue")
    p.add_argument("--years", type=_years_range, help="restrict prevalence scope to YEAR or FIRST..LAST")
    p.add_argument("--top", type=int, help="with --venue/--years: keep only the top-N topics")
    _add_output(p)
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("trends", help="export per-year topic probabilities for a venue")
    _add_model_corpus(p)
    p.add_argument("--venue", required=True)
    p.add_argument("--years", type=_years_range, help="restrict to YEAR or FIRST..LAST")
    _add_output(p)
    p.set_defaults(func=cmd_trends)

    p = sub.add_parser("recommend", help="rank entities by topic overlap with a target")
    _add_model_corpus(p)
    p.add_argument("--entity-kind", choices=["author", "venue"], default="author")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--target-topics", type=_topic_id_list, help="comma-separated topic ids")
    target.add_argument("--query-doc", help="derive target topics from this record id")
    rule = p.add_mutually_exclusive_group()
    rule.add_argument("--top-m", type=int, help="membership: top-M topics per document (default 3)")
    rule.add_argument("--threshold", type=float, help="membership: topics with theta >= threshold")
    _add_output(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("eval", help="held-out perplexity of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True, help="held-out corpus file (same vocabulary as the model)")
    p.add_argument("--fold-in-sweeps", type=int, default=50)
    p.add_argument("--seed", type=int, help="fold-in seed (default: the model's seed)")
    _add_output(p)
    p.set_defaults(func=cmd_eval)

    return parser


def _add_model_corpus(p):
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)


def _add_output(p):
    p.add_argument("--format", choices=["csv", "text"], default="csv")
    p.add_argument("--out", help="output file (default: stdout)")


# ---------------------------------------------------------------------------
# commands


def cmd_ingest(args) -> int:
    records = corpus_mod.load_records(args.input, args.input_format)
    stoplist = _load_stoplist(args.stoplist)
    if args.vocab_from:
        base = corpus_mod.load_corpus(args.vocab_from)
        corpus = corpus_mod.encode_records(records, base.vocab, stoplist)
    else:
        corpus = corpus_mod.build_corpus(records, stoplist, args.min_term_count)
    corpus_mod.save_corpus(corpus, args.out)
    print(f"documents={corpus.M}")
    print(f"vocabulary={corpus.vocab.V}")
    print(f"total_tokens={corpus.total_tokens}")
    print(f"dropped={len(corpus.dropped_record_ids)}")
    if corpus.dropped_record_ids:
        print(f"dropped_record_ids={','.join(corpus.dropped_record_ids)}")
    return EXIT_OK


def cmd_train(args) -> int:
    corpus = corpus_mod.load_corpus(args.corpus)
    hp = lda.Hyperparams(
        K=args.topics,
        alpha=args.alpha,
        beta=args.beta,
        iterations=args.iterations,
        burn_in=args.burn_in,
        seed=args.seed,
    )
    if args.chains > 1:
        model, outcomes = lda.train_chains(corpus, hp, args.chains)
        for outcome in outcomes:
            print(
                f"chain={outcome.chain} seed={outcome.seed} "
                f"final_log_likelihood={outcome.final_log_likelihood:.6f}",
                file=sys.stderr,
            )
    else:

        def report(record):
            print(
                f"iteration={record.iteration} log_likelihood={record.log_likelihood:.6f}",
                file=sys.stderr,
            )

        model = lda.train(corpus, hp, log_interval=args.log_interval, on_progress=report)

    if np.abs(model.phi.sum(axis=1) - 1.0).max() > 1e-9 or np.abs(model.theta.sum(axis=1) - 1.0).max() > 1e-9:
        raise CountInvariantError("estimated phi/theta rows do not sum to 1")
    lda.save_model(model, args.out)
    print(f"model={args.out}")
    print(f"topics={model.K} alpha={hp.alpha} beta={hp.beta} seed={model.hyperparams.seed}")
    return EXIT_OK


def cmd_topics(args) -> int:
    model, corpus = _load_model_and_corpus(args)
    words = min(args.words, model.V)
    if words < 1:
        raise ScholarLdaError("--words must be >= 1")
    if args.topic is not None:
        if not 0 <= args.topic < model.K:
            raise ScholarLdaError(f"topic {args.topic} out of range for K={model.K}")
        summaries = [topics_mod.top_words(model, args.topic, words)]
    elif args.venue is not None or args.years is not None:
        predicate, scope = corpus_mod.metadata_filter(args.venue, args.years)
        n = args.top if args.top is not None else model.K
        summaries = topics_mod.recommend_fields(
            model, corpus, predicate, n, words_per_topic=words, scope=scope
        )
    else:
        summaries = [topics_mod.top_words(model, k, words) for k in range(model.K)]

    if args.format == "csv":
        body = topics_mod.summaries_to_csv(summaries)
    else:
        rows = [
            (str(s.topic_id), str(rank), term, repr(prob))
            for s in summaries
            for rank, (term, prob) in enumerate(s.top_words, start=1)
        ]
        body = _text_table(("topic_id", "rank", "term", "probability"), rows)
    _write_output(_seed_header(model) + body, args.out)
    return EXIT_OK


def cmd_trends(args) -> int:
    model, corpus = _load_model_and_corpus(args)
    series = trends_mod.topic_year_series(model, corpus, args.venue)
    if args.years is not None:
        keep = [i for i, y in enumerate(series.years) if args.years[0] <= y <= args.years[1]]
        if not keep:
            raise ScholarLdaError(
                f"venue {args.venue!r} has no data in {args.years[0]}..{args.years[1]}"
            )
        series = trends_mod.TrendSeries(
            venue=series.venue,
            years=tuple(series.years[i] for i in keep),
            values=series.values[keep],
        )
    if args.format == "csv":
        body = trends_mod.series_to_csv(series)
    else:
        rows = [
            (series.venue, str(year), str(k), repr(float(series.values[i, k])))
            for i, year in enumerate(series.years)
            for k in range(series.K)
        ]
        body = _text_table(("venue", "year", "topic_id", "probability"), rows)
    _write_output(_seed_header(model) + body, args.out)
    return EXIT_OK


def cmd_recommend(args) -> int:
    model, corpus = _load_model_and_corpus(args)
    if args.threshold is not None:
        rule = recommend_mod.threshold_rule(args.threshold)
    else:
        rule = recommend_mod.top_m_rule(args.top_m if args.top_m is not None else 3)

    if args.target_topics is not None:
        bad = [t for t in args.target_topics if not 0 <= t < model.K]
        if bad:
            raise ScholarLdaError(f"target topics out of range for K={model.K}: {bad}")
        target = recommend_mod.TargetTopics.of(args.target_topics)
    else:
        try:
            doc = corpus.doc_by_record_id(args.query_doc)
        except KeyError:
            raise UnknownEntityError(f"no document with record id {args.query_doc!r}") from None
        member = rule(model.theta[doc.doc_index])
        target = recommend_mod.TargetTopics.of(member)
        if not target.topic_ids:
            raise ScholarLdaError(
                f"query document {args.query_doc!r} yields an empty target topic set"
            )

    ids = corpus.author_ids() if args.entity_kind == "author" else corpus.venues()
    if not ids:
        raise ScholarLdaError(f"corpus has no {args.entity_kind} entities")
    profiles = [
        recommend_mod.entity_profile(model, corpus, eid, rule, entity_kind=args.entity_kind)
        for eid in ids
    ]
    ranking = recommend_mod.rank_entities(target, profiles)

    if args.format == "csv":
        body = recommend_mod.ranking_to_csv(ranking)
    else:
        rows = [
            (eid, repr(score), str(rank))
            for rank, (eid, score) in enumerate(ranking.entries, start=1)
        ]
        body = _text_table(("entity_id", "score", "rank"), rows)
    _write_output(_seed_header(model) + body, args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = lda.load_model(args.model)
    heldout = corpus_mod.load_corpus(args.corpus)
    value = lda.perplexity(model, heldout, fold_in_sweeps=args.fold_in_sweeps, seed=args.seed)
    seed = args.seed if args.seed is not None else model.hyperparams.seed
    rows = [
        ("perplexity", repr(value)),
        ("fold_in_sweeps", str(args.fold_in_sweeps)),
        ("seed", str(seed)),
    ]
    if args.format == "csv":
        body = "metric,value\n" + "".join(f"{k},{v}\n" for k, v in rows)
    else:
        body = _text_table(("metric", "value"), rows)
    _write_output(_seed_header(model) + body, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# shared helpers


def _load_stoplist(value):
    if value is None:
        return corpus_mod.Stoplist.default()
    if value == "none":
        return corpus_mod.Stoplist.empty()
    return corpus_mod.Stoplist.from_file(value)


def _load_model_and_corpus(args):
    model = lda.load_model(args.model)
    corpus = corpus_mod.load_corpus(args.corpus)
    actual = corpus_mod.corpus_fingerprint(corpus)
    if model.corpus_fingerprint and actual != model.corpus_fingerprint:
        raise FingerprintMismatchError(
            f"corpus file {args.corpus} (fingerprint {actual}) is not the corpus "
            f"this model was trained on ({model.corpus_fingerprint})"
        )
    return model, corpus


def _seed_header(model) -> str:
    return f"# seed={model.hyperparams.seed}\n"


def _text_table(header, rows) -> str:
    widths = [len(col) for col in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(col.ljust(widths[i]) for i, col in enumerate(header)).rstrip()]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _write_output(text, out_path):
    if out_path:
        atomic_write_text(out_path, text)
    else:
        sys.stdout.write(text)


def _emit_error(exc) -> None:
    record = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CountInvariantError as exc:
        _emit_error(exc)
        return EXIT_INTERNAL
    except (ScholarLdaError, OSError) as exc:
        _emit_error(exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
