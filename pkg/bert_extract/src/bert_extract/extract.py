"""Corpus encoding: pretrained transformer to word-aligned subword rows.

Every word is tokenized on its own so the subword count per word is
known before encoding. Documents whose subword total exceeds the
sequence budget are split at word boundaries into non-overlapping
windows, each encoded independently; the split is recorded in the
archive meta. Sequence-level control tokens bracket every window but
their rows are stripped before writing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch

from .archive import write_archive, write_warnings
from .corpus import Document, read_corpus_jsonl
from .errors import ModelError, ParamError

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "bert-base-uncased"


@dataclass(frozen=True)
class ExtractConfig:
    model: str = DEFAULT_MODEL
    layer: int = -1
    batch_size: int = 32
    max_len: int = 512
    device: str = "cpu"

    def __post_init__(self) -> None:
        if not self.model:
            raise ParamError("model identifier must be non-empty")
        if self.batch_size < 1:
            raise ParamError(f"batch_size must be >= 1, got {self.batch_size}")
        # room for the two control tokens plus at least one subword
        if self.max_len < 3:
            raise ParamError(f"max_len must be >= 3, got {self.max_len}")
        if not self.device:
            raise ParamError("device must be non-empty")


class _Encoder:
    """Loaded tokenizer/model pair with a validated layer choice."""

    def __init__(self, cfg: ExtractConfig):
        try:
            from transformers import AutoModel, AutoTokenizer
            self.tokenizer = AutoTokenizer.from_pretrained(cfg.model)
            self.model = AutoModel.from_pretrained(cfg.model)
        except Exception as exc:
            raise ModelError(f"cannot load model {cfg.model!r}: {exc}") from exc
        for name in ("cls_token", "sep_token", "unk_token", "pad_token_id"):
            if getattr(self.tokenizer, name, None) is None:
                raise ModelError(f"tokenizer for {cfg.model!r} lacks {name}")
        try:
            self.model.to(cfg.device)
        except (RuntimeError, ValueError) as exc:
            raise ParamError(f"cannot use device {cfg.device!r}: {exc}") from exc
        self.model.eval()

        depth = int(self.model.config.num_hidden_layers)
        n_states = depth + 1  # embedding output plus one per layer
        if not -n_states <= cfg.layer <= depth:
            raise ParamError(
                f"layer {cfg.layer} outside [-{n_states}, {depth}] for a "
                f"{depth}-layer model")
        self.layer_index = cfg.layer if cfg.layer >= 0 else n_states + cfg.layer

        limit = int(getattr(self.model.config, "max_position_embeddings",
                            cfg.max_len))
        if cfg.max_len > limit:
            raise ParamError(
                f"max_len {cfg.max_len} exceeds the model limit {limit}")
        self.cfg = cfg

    def encode_batch(self, token_lists: list[list[str]]) -> list[np.ndarray]:
        """Encode windows; return per-window rows without control tokens."""
        width = max(len(tokens) for tokens in token_lists)
        pad_id = self.tokenizer.pad_token_id
        ids = torch.full((len(token_lists), width), pad_id, dtype=torch.long)
        mask = torch.zeros((len(token_lists), width), dtype=torch.long)
        for row, tokens in enumerate(token_lists):
            ids[row, :len(tokens)] = torch.tensor(
                self.tokenizer.convert_tokens_to_ids(tokens), dtype=torch.long)
            mask[row, :len(tokens)] = 1
        with torch.inference_mode():
            out = self.model(input_ids=ids.to(self.cfg.device),
                             attention_mask=mask.to(self.cfg.device),
                             output_hidden_states=True)
        states = out.hidden_states[self.layer_index].cpu()
        states = states.to(torch.float32).numpy()
        return [states[row, 1:len(tokens) - 1].copy()
                for row, tokens in enumerate(token_lists)]


def _plan_words(encoder: _Encoder, doc: Document,
                budget: int) -> tuple[list[list[str]], list[dict]]:
    """Subword pieces per word, substituting and flagging degenerate cases."""
    warnings = []
    pieces_per_word = []
    for index, word in enumerate(doc.words):
        pieces = encoder.tokenizer.tokenize(word)
        if not pieces:
            pieces = [encoder.tokenizer.unk_token]
            warnings.append({"doc_id": doc.doc_id, "word_index": index,
                             "word": word, "reason": "no-subwords"})
        if len(pieces) > budget:
            pieces = pieces[:budget]
            warnings.append({"doc_id": doc.doc_id, "word_index": index,
                             "word": word, "reason": "word-truncated"})
        pieces_per_word.append(pieces)
    return pieces_per_word, warnings


def _window_words(counts: list[int], budget: int) -> list[tuple[int, int]]:
    """Greedy non-overlapping word ranges whose subword totals fit."""
    windows = []
    lo = 0
    used = 0
    for i, count in enumerate(counts):
        if used and used + count > budget:
            windows.append((lo, i))
            lo = i
            used = 0
        used += count
    windows.append((lo, len(counts)))
    return windows


def extract_corpus(corpus_path, cfg: ExtractConfig, out_dir) -> dict:
    """Encode a corpus file into an archive directory; return a summary."""
    documents = read_corpus_jsonl(corpus_path)
    encoder = _Encoder(cfg)
    budget = cfg.max_len - 2

    plans = []
    warnings: list[dict] = []
    jobs = []  # (doc index, window token lists) in corpus order
    for doc_index, doc in enumerate(documents):
        pieces_per_word, doc_warnings = _plan_words(encoder, doc, budget)
        warnings.extend(doc_warnings)
        counts = [len(p) for p in pieces_per_word]
        windows = _window_words(counts, budget)
        plans.append((counts, windows))
        for lo, hi in windows:
            flat = [piece for word in pieces_per_word[lo:hi] for piece in word]
            jobs.append((doc_index,
                         [encoder.tokenizer.cls_token] + flat
                         + [encoder.tokenizer.sep_token]))

    doc_rows: list[list[np.ndarray]] = [[] for _ in documents]
    for start in range(0, len(jobs), cfg.batch_size):
        batch = jobs[start:start + cfg.batch_size]
        for (doc_index, _), rows in zip(batch,
                                        encoder.encode_batch(
                                            [tokens for _, tokens in batch])):
            doc_rows[doc_index].append(rows)

    dim = int(encoder.model.config.hidden_size)
    spans = []
    windows_meta = []
    blocks = []
    for doc, (counts, windows), rows in zip(documents, plans, doc_rows):
        stacked = (np.concatenate(rows, axis=0) if rows
                   else np.zeros((0, dim), dtype=np.float32))
        offsets = np.concatenate([[0], np.cumsum(counts)])
        spans.append(tuple((int(offsets[i]), int(offsets[i + 1]))
                           for i in range(len(counts))))
        windows_meta.append(tuple(windows) if len(windows) > 1 else None)
        blocks.append(stacked)

    matrix = (np.concatenate(blocks, axis=0) if blocks
              else np.zeros((0, dim), dtype=np.float32))
    write_archive(documents, spans, windows_meta, matrix, out_dir)
    write_warnings(warnings, out_dir)

    summary = {
        "n_docs": len(documents),
        "n_rows": int(matrix.shape[0]),
        "dim": dim,
        "n_windows": len(jobs),
        "n_warnings": len(warnings),
    }
    logger.info("wrote archive %s: %s", out_dir, summary)
    return summary
