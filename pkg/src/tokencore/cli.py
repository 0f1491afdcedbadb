"""Command-line pipeline: inject, embed, bank, score, eval.

Data flows through files only (corpus JSONL, embedding archive directory,
bank file, scores JSONL), so each subcommand is independently rerunnable
and byte-deterministic given identical flags and inputs. Exit codes:
0 success, 1 file errors, 2 validation or usage errors, 3 degenerate
metric inputs.

The env var TOKENCORE_THREADS caps scoring parallelism; results are
identical for any value because documents are scored independently with
a deterministic kernel.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .ann import AnnParams, build_ann_index
from .archive import Archive, doc_row_offsets, read_archive, write_archive
from .bank import (Aggregator, ScoredDocument, SubsampleConfig, SubsampleMode,
                   build_bank, load_bank, save_bank, score_tokens)
from .baselines import EcodDetector, IsolationForestDetector, LofDetector
from .corpus import Corpus, read_corpus_jsonl, write_corpus_jsonl
from .errors import (DegenerateError, FormatError, IoError, ParamError,
                     SchemaError, TokencoreError)
from .metrics import evaluate_run, split_corpus
from .pooling import PoolingMode, pool_document
from .synth import (CorruptionConfig, HashEmbedConfig, VocabConfig,
                    embed_corpus, gen_normal_corpus, inject_gibberish)

log = logging.getLogger("tokencore")


def _parse_range(text: str, name: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            value = int(lo)
            return value, value
        return int(lo), int(hi)
    except ValueError:
        raise ParamError(f"{name} must be INT or MIN:MAX, got {text!r}") from None


def _thread_count() -> int:
    raw = os.environ.get("TOKENCORE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        raise ParamError(f"TOKENCORE_THREADS must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ParamError(f"TOKENCORE_THREADS must be >= 1, got {threads}")
    return threads


def _write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def cmd_inject(args) -> int:
    if args.generate:
        word_lo, word_hi = _parse_range(args.word_len, "--word-len")
        doc_lo, doc_hi = _parse_range(args.doc_len, "--doc-len")
        vocab_cfg = VocabConfig(vocab_size=args.vocab_size,
                                word_len_min=word_lo, word_len_max=word_hi,
                                doc_len_min=doc_lo, doc_len_max=doc_hi,
                                zipf_exponent=args.zipf)
        gen_seed, corrupt_seed = (int(s) for s in
                                  np.random.SeedSequence(args.seed).generate_state(2))
        corpus = gen_normal_corpus(vocab_cfg, args.docs, seed=gen_seed)
    elif args.input:
        corpus = read_corpus_jsonl(args.input)
        corrupt_seed = args.seed
    else:
        raise ParamError("inject needs --in FILE or --generate")

    tok_lo, tok_hi = _parse_range(args.tokens, "--tokens")
    gib_lo, gib_hi = _parse_range(args.gib_len, "--gib-len")
    corrupted = inject_gibberish(corpus, CorruptionConfig(
        doc_anomaly_rate=args.rate, tokens_min=tok_lo, tokens_max=tok_hi,
        gibberish_len_min=gib_lo, gibberish_len_max=gib_hi,
        seed=corrupt_seed))
    write_corpus_jsonl(corpus=corrupted, path=args.out)
    n_anom = sum(1 for d in corrupted.documents if d.label == 1)
    log.info("wrote %d documents (%d anomalous) to %s",
             len(corrupted.documents), n_anom, args.out)
    return 0


def cmd_embed(args) -> int:
    if args.provider != "hash":
        raise ParamError(
            f"unknown provider {args.provider!r}; this command embeds with "
            "the hash provider (transformer archives come from the extractor "
            "tool and use the same directory format)")
    corpus = read_corpus_jsonl(args.input)
    n_lo, n_hi = _parse_range(args.ngrams, "--ngrams")
    cfg = HashEmbedConfig(dim=args.dim, ngram_min=n_lo, ngram_max=n_hi,
                          seed=args.hash_seed)
    archive = embed_corpus(corpus, cfg)
    write_archive(archive.corpus, archive.spans, archive.matrix, args.out)
    log.info("embedded %d documents (%d words, dim %d) into %s",
             len(corpus.documents), archive.matrix.shape[0], args.dim, args.out)
    return 0


def _select_train(archive, train_frac, split_seed):
    """Restrict an archive to the training normals of a seeded split."""
    corpus, spans, matrix = archive
    train, _ = split_corpus(corpus, train_frac=train_frac, seed=split_seed)
    keep = {d.doc_id for d in train.documents}
    offsets = doc_row_offsets(spans)
    kept_docs, kept_spans, kept_rows = [], [], []
    for i, doc in enumerate(corpus.documents):
        if doc.doc_id in keep:
            kept_docs.append(doc)
            kept_spans.append(spans[i])
            kept_rows.append(matrix[offsets[i]:offsets[i + 1]])
    sub_matrix = (np.concatenate(kept_rows) if kept_rows
                  else np.zeros((0, matrix.shape[1]), dtype=matrix.dtype))
    return Archive(corpus=Corpus(tuple(kept_docs), name=train.name),
                   spans=tuple(kept_spans), matrix=sub_matrix)


def cmd_bank(args) -> int:
    archive = read_archive(args.input)
    if args.train_frac is not None:
        archive = _select_train(archive, args.train_frac, args.split_seed)
        log.info("training on %d documents selected by split seed %d",
                 len(archive.corpus.documents), args.split_seed)
    mode = PoolingMode.parse(args.pooling)
    if args.subsample < 1.0:
        sub = SubsampleConfig(mode=SubsampleMode.UNIFORM,
                              keep_fraction=args.subsample, seed=args.seed)
    else:
        sub = SubsampleConfig(seed=args.seed)
    bank = build_bank(archive, mode=mode, subsample=sub)
    save_bank(bank, args.out)
    log.info("bank: %d vectors of dim %d -> %s",
             bank.n_vectors, bank.dim, args.out)
    return 0


def _pooling_from_bank(bank, override: str | None) -> PoolingMode:
    if override:
        return PoolingMode.parse(override)
    for part in bank.provenance.split("|"):
        if part.startswith("pooling="):
            return PoolingMode.parse(part.split("=", 1)[1])
    return PoolingMode.MAX


def _doc_word_vectors(archive, mode):
    """Yield (doc_id, pooled word matrix) per document, in corpus order."""
    corpus, spans, matrix = archive
    offsets = doc_row_offsets(spans)
    for i, doc in enumerate(corpus.documents):
        rows = matrix[offsets[i]:offsets[i + 1]]
        yield doc.doc_id, pool_document(rows, spans[i], mode)


def _make_token_scorer(args, bank):
    if args.detector == "tokencore":
        return lambda vecs: score_tokens(bank, vecs)
    train = bank.vectors.astype(np.float64)
    if args.detector == "lof":
        det = LofDetector(n_neighbors=args.lof_k).fit(train)
    elif args.detector == "iforest":
        det = IsolationForestDetector(n_trees=args.iforest_trees,
                                      psi=args.iforest_psi,
                                      seed=args.detector_seed).fit(train)
    elif args.detector == "ecod":
        det = EcodDetector().fit(train)
    else:
        raise ParamError(f"unknown detector {args.detector!r}")
    return det.decision_function


def cmd_score(args) -> int:
    bank = load_bank(args.bank)
    archive = read_archive(args.input)
    mode = _pooling_from_bank(bank, args.pooling)
    aggregator = Aggregator.parse(args.aggregator)
    ann_params = AnnParams(enabled=args.ann,
                           target_recall_at_1=args.ann_recall,
                           n_lists=args.ann_lists, n_probes=args.ann_probes,
                           seed=args.ann_seed)
    if args.detector == "tokencore":
        bank = build_ann_index(bank, ann_params)
    elif args.ann:
        raise ParamError("--ann only applies to the tokencore detector")
    scorer = _make_token_scorer(args, bank)

    docs = list(_doc_word_vectors(archive, mode))

    def score_one(item):
        doc_id, vecs = item
        token_scores = np.asarray(scorer(vecs), dtype=np.float64)
        return ScoredDocument(doc_id=doc_id,
                              token_scores=tuple(float(s) for s in token_scores),
                              doc_score=aggregator.aggregate(token_scores))

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scored = list(pool.map(score_one, docs))
    else:
        scored = [score_one(item) for item in docs]

    lines = [json.dumps({"doc_id": s.doc_id,
                         "token_scores": list(s.token_scores),
                         "doc_score": s.doc_score},
                        separators=(",", ":"), ensure_ascii=False)
             for s in scored]
    _write_text(args.out, "\n".join(lines) + "\n")
    meta = {
        "bank": os.path.basename(args.bank),
        "pooling": mode.value,
        "aggregator": args.aggregator,
        "detector": args.detector,
        "ann": args.ann,
        "seed": args.detector_seed,
    }
    _write_text(args.out + ".meta.json",
                json.dumps(meta, indent=2, sort_keys=True) + "\n")
    log.info("scored %d documents -> %s", len(scored), args.out)
    return 0


def _read_scores(path) -> dict[str, ScoredDocument]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read scores from {path}: {exc}") from exc
    out: dict[str, ScoredDocument] = {}
    for lineno, line in enumerate(raw_lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            doc = ScoredDocument(doc_id=rec["doc_id"],
                                 token_scores=tuple(float(s) for s in
                                                    rec["token_scores"]),
                                 doc_score=float(rec["doc_score"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise SchemaError(f"{path}:{lineno}: bad score record: {exc}") from exc
        if doc.doc_id in out:
            raise SchemaError(f"{path}:{lineno}: duplicate doc_id {doc.doc_id!r}")
        out[doc.doc_id] = doc
    return out


def cmd_eval(args) -> int:
    scored_by_id = _read_scores(args.scores)
    corpus = read_corpus_jsonl(args.corpus)
    if args.train_frac is not None:
        _, test = split_corpus(corpus, train_frac=args.train_frac,
                               seed=args.split_seed)
    else:
        test = corpus

    scored, token_labels, doc_labels = [], [], []
    for doc in test.documents:
        if doc.doc_id not in scored_by_id:
            raise SchemaError(f"no scores for test document {doc.doc_id!r}")
        if doc.label is None:
            raise SchemaError(f"document {doc.doc_id!r} is unlabeled")
        labels = []
        for w in doc.words:
            if w.label is None:
                raise SchemaError(
                    f"document {doc.doc_id!r}: word {w.text!r} is unlabeled")
            labels.append(w.label)
        scored.append(scored_by_id[doc.doc_id])
        token_labels.append(labels)
        doc_labels.append(doc.label)

    config = {}
    meta_path = args.scores + ".meta.json"
    if os.path.exists(meta_path):
        try:
            with open(meta_path, "r", encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, ValueError):
            config = {}
    if args.train_frac is not None:
        config["train_frac"] = args.train_frac
        config["split_seed"] = args.split_seed

    report = evaluate_run(scored, token_labels, doc_labels, config=config)
    print(report.format_table())
    if args.out:
        _write_text(args.out, report.to_json() + "\n")
        log.info("report -> %s", args.out)
    if args.csv:
        rows = ["level,label,score"]
        for doc, labels in zip(scored, token_labels):
            rows.extend(f"token,{l},{s!r}"
                        for l, s in zip(labels, doc.token_scores))
        for doc, label in zip(scored, doc_labels):
            rows.append(f"doc,{label},{doc.doc_score!r}")
        _write_text(args.csv, "\n".join(rows) + "\n")
        log.info("raw pairs -> %s", args.csv)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokencore",
        description="Token-level text anomaly detection over embedding archives.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inject", help="generate or corrupt a corpus with gibberish")
    p.add_argument("--in", dest="input", help="input corpus JSONL (all normal)")
    p.add_argument("--generate", action="store_true",
                   help="generate a synthetic normal corpus instead of reading one")
    p.add_argument("--out", required=True, help="output corpus JSONL")
    p.add_argument("--docs", type=int, default=500, help="documents to generate")
    p.add_argument("--vocab-size", type=int, default=120)
    p.add_argument("--word-len", default="3:8", metavar="MIN:MAX")
    p.add_argument("--doc-len", default="6:16", metavar="MIN:MAX")
    p.add_argument("--zipf", type=float, default=1.0, help="zipf exponent")
    p.add_argument("--rate", type=float, default=0.1, help="document anomaly rate")
    p.add_argument("--tokens", default="1:3", metavar="MIN:MAX",
                   help="gibberish insertions per corrupted document")
    p.add_argument("--gib-len", default="6:12", metavar="MIN:MAX",
                   help="gibberish word length")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("embed", help="embed a corpus into an archive directory")
    p.add_argument("--in", dest="input", required=True, help="corpus JSONL")
    p.add_argument("--out", required=True, help="output archive directory")
    p.add_argument("--provider", default="hash", help="embedding provider")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--ngrams", default="2:3", metavar="MIN:MAX")
    p.add_argument("--hash-seed", type=int, default=0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("bank", help="build a memory bank from a normal archive")
    p.add_argument("--in", dest="input", required=True, help="archive directory")
    p.add_argument("--out", required=True, help="output bank file")
    p.add_argument("--pooling", default="max", choices=["max", "mean", "first"])
    p.add_argument("--subsample", type=float, default=1.0,
                   help="uniformly keep this fraction of pooled vectors")
    p.add_argument("--seed", type=int, default=0, help="subsample seed")
    p.add_argument("--train-frac", type=float, default=None,
                   help="split off this fraction of normals as training")
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(func=cmd_bank)

    p = sub.add_parser("score", help="score an archive against a bank")
    p.add_argument("--bank", required=True, help="bank file")
    p.add_argument("--in", dest="input", required=True, help="archive directory")
    p.add_argument("--out", required=True, help="output scores JSONL")
    p.add_argument("--pooling", default=None, choices=["max", "mean", "first"],
                   help="override the pooling mode recorded in the bank")
    p.add_argument("--aggregator", default="mean",
                   help="document aggregation: mean, max, or topk:K")
    p.add_argument("--detector", default="tokencore",
                   choices=["tokencore", "lof", "iforest", "ecod"])
    p.add_argument("--lof-k", type=int, default=20)
    p.add_argument("--iforest-trees", type=int, default=100)
    p.add_argument("--iforest-psi", type=int, default=None)
    p.add_argument("--detector-seed", type=int, default=0)
    p.add_argument("--ann", action="store_true",
                   help="accelerate with a recall-checked approximate index")
    p.add_argument("--ann-recall", type=float, default=0.95)
    p.add_argument("--ann-lists", type=int, default=0, help="0 = auto")
    p.add_argument("--ann-probes", type=int, default=0, help="0 = auto")
    p.add_argument("--ann-seed", type=int, default=0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="evaluate scores against a labeled corpus")
    p.add_argument("--scores", required=True, help="scores JSONL")
    p.add_argument("--corpus", required=True, help="labeled corpus JSONL")
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.add_argument("--csv", default=None,
                   help="dump raw (label, score) pairs for external analysis")
    p.add_argument("--train-frac", type=float, default=None,
                   help="evaluate only the test side of this seeded split")
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO,
                            format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (IoError, FormatError) as exc:
        log.error("%s", exc)
        return 1
    except OSError as exc:
        log.error("%s", exc)
        return 1
    except DegenerateError as exc:
        log.error("%s", exc)
        return 3
    except TokencoreError as exc:
        log.error("%s", exc)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
