"""Command-line entry point.

Exit codes match the scoring pipeline's convention: 0 success, 1 for
file or model failures, 2 for validation problems.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import BertExtractError, FormatError, IoError, ModelError
from .extract import DEFAULT_MODEL, ExtractConfig, extract_corpus

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bert-extract",
        description="encode a JSONL corpus into an embedding archive")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser(
        "extract", help="run the encoder and write an archive directory")
    ex.add_argument("--corpus", required=True,
                    help="input corpus JSONL path")
    ex.add_argument("--out", required=True,
                    help="output archive directory")
    ex.add_argument("--model", default=DEFAULT_MODEL,
                    help=f"model identifier or local path (default {DEFAULT_MODEL})")
    ex.add_argument("--layer", type=int, default=-1,
                    help="hidden-state index; 0 is the embedding output, "
                    "-1 the last layer (default -1)")
    ex.add_argument("--batch", type=int, default=32,
                    help="windows per forward pass (default 32)")
    ex.add_argument("--max-len", type=int, default=512,
                    help="sequence budget including control tokens (default 512)")
    ex.add_argument("--device", default="cpu",
                    help="torch device tag (default cpu)")
    return parser


def main(argv: list[str] | None = None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = ExtractConfig(model=args.model, layer=args.layer,
                            batch_size=args.batch, max_len=args.max_len,
                            device=args.device)
        summary = extract_corpus(args.corpus, cfg, args.out)
    except (IoError, FormatError, ModelError) as exc:
        logger.error("error: %s", exc)
        return 1
    except OSError as exc:
        logger.error("error: %s", exc)
        return 1
    except BertExtractError as exc:
        logger.error("error: %s", exc)
        return 2
    print(f"archive {args.out}: {summary['n_docs']} docs, "
          f"{summary['n_rows']} rows, dim {summary['dim']}, "
          f"{summary['n_windows']} windows, {summary['n_warnings']} warnings")
    return 0


def entrypoint() -> None:
    sys.exit(main())
