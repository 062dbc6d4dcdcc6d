"""Command-line entry point: ``promptrel {idf,train,evaluate,report,inspect}``.

Exit status is 0 on success, 1 on data or runtime errors and 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .embeddings import (
    build_idf, load_embeddings, load_idf, load_weights, save_idf, save_weights,
)
from .evaluation import (
    inspect_weights, metrics, score_all, score_combination, score_majority, score_random,
    top_words_for_prompt,
)
from .trainer import TrainerConfig, train
from .vectorizers import Method


METHODS = ("tfidf", "sum", "idf-emb", "weighted", "combo", "random", "majority")
# flags needed per method, as (argparse dest, flag)
REQUIRED_TABLES = {
    "tfidf": [("idf", "--idf")],
    "sum": [("embeddings", "--embeddings")],
    "idf-emb": [("embeddings", "--embeddings"), ("idf", "--idf")],
    "weighted": [("embeddings", "--embeddings"), ("weights", "--weights")],
    "combo": [("idf", "--idf"), ("embeddings", "--embeddings"), ("weights", "--weights")],
    "random": [],
    "majority": [],
}
TABLE_ORDER = ("random", "majority", "tfidf", "sum", "idf-emb", "weighted", "combo")
TABLE_LABELS = {
    "random": "Random", "majority": "Majority", "tfidf": "TF-IDF", "sum": "Word2Vec",
    "idf-emb": "IDF-Embeddings", "weighted": "Weighted-Embeddings", "combo": "Combination",
}


class DataError(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _unit_float(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _config(args) -> dict:
    skip = {"func", "verbose", "parser"}
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _require_file(path: Path, what: str) -> Path:
    if not path.is_file():
        raise DataError(f"{what} not found: {path}")
    return path


def _add_table_flags(p):
    p.add_argument("--idf", type=Path, help="IDF table TSV (from `promptrel idf`)")
    p.add_argument("--embeddings", type=Path, help="word vectors, text or binary layout")
    p.add_argument("--embeddings-format", choices=("auto", "text", "binary"), default="auto")
    p.add_argument("--weights", type=Path, help="learned weight TSV (from `promptrel train`)")


def cmd_idf(args) -> int:
    corpus = corpus_mod.load_plain_corpus(_require_file(args.corpus, "corpus"))
    idf = build_idf(corpus)
    save_idf(idf, args.out)
    print(json.dumps({"config": _config(args), "n_sentences": idf.n_sentences,
                      "vocab_size": len(idf)}, sort_keys=True))
    return 0


def _checkpoint_path(out: Path, epoch: int) -> Path:
    return out.with_name(f"{out.stem}.epoch{epoch}.tsv")


def cmd_train(args) -> int:
    corpus = corpus_mod.load_plain_corpus(_require_file(args.corpus, "corpus"))
    emb = load_embeddings(_require_file(args.embeddings, "embeddings"), args.embeddings_format)
    config = TrainerConfig(args.lr, args.std, args.epochs, args.seed)

    def save_checkpoint(epoch, weights):
        save_weights(weights, _checkpoint_path(args.out, epoch))

    weights, report = train(corpus, emb, config, save_checkpoint if args.checkpoint else None)
    save_weights(weights, args.out)
    report_path = args.report or args.out.with_name(args.out.name + ".report.jsonl")
    record = report.to_json(config, run=_config(args))
    report_path.write_text(record + "\n", encoding="utf-8")
    print(record)
    return 0


def _load_tables(args, names):
    tables = {}
    if "idf" in names:
        tables["idf"] = load_idf(_require_file(args.idf, "IDF table"))
    if "embeddings" in names:
        tables["emb"] = load_embeddings(_require_file(args.embeddings, "embeddings"),
                                        args.embeddings_format)
    if "weights" in names:
        tables["weights"] = load_weights(_require_file(args.weights, "weights"))
    return tables


def _score(method: str, dataset, tables, args):
    if method == "random":
        return score_random(dataset, args.seed)
    if method == "majority":
        return score_majority(dataset)
    if method == "combo":
        m1 = score_all(dataset, Method("tfidf", idf=tables["idf"]))
        m2 = score_all(dataset, Method("weighted", emb=tables["emb"], weights=tables["weights"]))
        return score_combination(m1, m2, args.alpha)
    return score_all(dataset, Method(method, **tables))


def cmd_evaluate(args) -> int:
    missing = [flag for dest, flag in REQUIRED_TABLES[args.method] if getattr(args, dest) is None]
    if missing:
        args.parser.error(f"--method {args.method} requires {', '.join(missing)}")
    dataset = corpus_mod.load_labeled_dataset(
        _require_file(args.prompts, "prompts"), _require_file(args.sentences, "sentences"))
    tables = _load_tables(args, {dest for dest, _ in REQUIRED_TABLES[args.method]})
    matrix = _score(args.method, dataset, tables, args)
    report = metrics(matrix, args.method)
    report.config = _config(args)
    print(report.summary())
    print(report.to_json())
    if args.out:
        args.out.write_text(report.to_json() + "\n", encoding="utf-8")
    if args.scores_out:
        args.scores_out.write_text(matrix.to_tsv(), encoding="utf-8")
    return 0


def cmd_report(args) -> int:
    dataset = corpus_mod.load_labeled_dataset(
        _require_file(args.prompts, "prompts"), _require_file(args.sentences, "sentences"))
    given = {dest for dest in ("idf", "embeddings", "weights") if getattr(args, dest) is not None}
    tables = _load_tables(args, given)
    records = []
    lines = [f"{'':<22}{'ACC':>8}{'MRR':>8}"]
    for method in TABLE_ORDER:
        if not all(dest in given for dest, _ in REQUIRED_TABLES[method]):
            continue
        report = metrics(_score(method, dataset, tables, args), method)
        records.append(report.to_record())
        lines.append(f"{TABLE_LABELS[method]:<22}{100 * report.accuracy:>8.1f}{100 * report.mrr:>8.1f}")
    print("\n".join(lines))
    record = json.dumps({"config": _config(args), "results": records,
                         "n_sentences": len(dataset.samples)}, sort_keys=True)
    print(record)
    if args.out:
        args.out.write_text(record + "\n", encoding="utf-8")
    return 0


def cmd_inspect(args) -> int:
    print("# config: " + json.dumps(_config(args), sort_keys=True), file=sys.stderr)
    if args.target == "weights":
        weights = load_weights(_require_file(args.weights, "weights"))
        bottom, _ = inspect_weights(weights, args.bottom)
        _, top = inspect_weights(weights, args.top)
        for word, value in bottom + top:
            print(f"{word}\t{value:.2f}")
        return 0
    prompts = corpus_mod.load_prompts(_require_file(args.prompts, "prompts"))
    if args.prompt_id not in prompts:
        raise DataError(f"unknown prompt-id {args.prompt_id!r}")
    tables = _load_tables(args, {"embeddings", "weights"})
    for word, score, weight in top_words_for_prompt(
            args.prompt_id, prompts, tables["emb"], tables["weights"], args.k):
        print(f"{word}\t{score:.3f}\t{weight:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promptrel", description="Sentence-level prompt relevance scoring.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("idf", help="build a sentence-level IDF table from a plain corpus")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_idf)

    p = sub.add_parser("train", help="learn word weights from a plain corpus")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--embeddings-format", choices=("auto", "text", "binary"), default="auto")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--report", type=Path, help="default: <out>.report.jsonl")
    p.add_argument("--lr", type=_positive_float, default=0.1)
    p.add_argument("--std", type=_positive_float, default=2.5)
    p.add_argument("--epochs", type=_positive_int, default=5)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--checkpoint", action="store_true",
                   help="write <out-stem>.epoch<k>.tsv after every epoch")
    p.set_defaults(func=cmd_train)

    for name, func, help_ in (
        ("evaluate", cmd_evaluate, "score a labeled dataset with one method"),
        ("report", cmd_report, "score with every method whose tables are given"),
    ):
        p = sub.add_parser(name, help=help_)
        if name == "evaluate":
            p.add_argument("--method", choices=METHODS, required=True)
            p.add_argument("--scores-out", type=Path, help="write the score matrix TSV")
        p.add_argument("--prompts", type=Path, required=True)
        p.add_argument("--sentences", type=Path, required=True)
        _add_table_flags(p)
        p.add_argument("--alpha", type=_unit_float, default=0.5,
                       help="TF-IDF share in the combination method")
        p.add_argument("--seed", type=_seed, default=0, help="seed for the random baseline")
        p.add_argument("--out", type=Path)
        p.set_defaults(func=func, parser=p)

    p = sub.add_parser("inspect", help="show learned weights or top words for a prompt")
    isub = p.add_subparsers(dest="target", required=True)
    q = isub.add_parser("weights")
    q.add_argument("--weights", type=Path, required=True)
    q.add_argument("--top", type=_nonneg_int, default=10)
    q.add_argument("--bottom", type=_nonneg_int, default=10)
    q.set_defaults(func=cmd_inspect)
    q = isub.add_parser("prompt-words")
    q.add_argument("--prompts", type=Path, required=True)
    q.add_argument("--prompt-id", required=True)
    q.add_argument("--embeddings", type=Path, required=True)
    q.add_argument("--embeddings-format", choices=("auto", "text", "binary"), default="auto")
    q.add_argument("--weights", type=Path, required=True)
    q.add_argument("--k", type=_nonneg_int, default=10)
    q.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DataError, OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"promptrel: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
