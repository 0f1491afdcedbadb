"""Ranking metrics, the normals-only train/test split, and run reports.

AUROC uses the Mann-Whitney average-rank formulation, so ties contribute
half credit and the score is invariant under any strictly increasing
transform of the scores. AUPRC is average precision with tied scores
collapsed into a single threshold group. Both require one positive and
one negative; single-class inputs raise DegenerateError rather than
returning a misleading number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bank import ScoredDocument
from .corpus import Corpus, Document
from .errors import DegenerateError, ParamError, SchemaError


def _check_labels_scores(labels, scores) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    if y.ndim != 1 or s.ndim != 1 or y.shape[0] != s.shape[0]:
        raise SchemaError(
            f"labels and scores must be equal-length 1-D, got {y.shape} vs {s.shape}")
    if y.shape[0] == 0:
        raise DegenerateError("cannot compute a metric on zero items")
    if not np.isin(y, (0, 1)).all():
        raise SchemaError("labels must be 0 or 1")
    if not np.isfinite(s).all():
        raise SchemaError("scores must be finite")
    return y.astype(np.int64), s


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, tied values all receiving the group mean rank."""
    _, inverse, counts = np.unique(scores, return_inverse=True,
                                   return_counts=True)
    ends = np.cumsum(counts).astype(np.float64)
    starts = ends - counts + 1.0
    return ((starts + ends) / 2.0)[inverse]


def auroc(labels, scores) -> float:
    """Area under the ROC curve via average ranks (higher score = positive).

    The final division is folded around 1/2: the smaller of U and its
    complement is divided, snapped to the 2^-53 grid (on which 1 - q is
    exactly representable), and mirrored back. Negating the scores then
    yields exactly 1 minus the original value, bit for bit.
    """
    y, s = _check_labels_scores(labels, scores)
    n_pos = int(y.sum())
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateError(
            f"auroc needs both classes, got {n_pos} positives and {n_neg} negatives")
    ranks = _average_ranks(s)
    u = float(ranks[y == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    den = float(n_pos) * float(n_neg)
    q = min(u, den - u) / den
    q = (q + 0.5) - 0.5
    return q if u <= den - u else 1.0 - q


def auprc(labels, scores) -> float:
    """Average precision over descending-score threshold groups."""
    y, s = _check_labels_scores(labels, scores)
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.shape[0]:
        raise DegenerateError(
            f"auprc needs both classes, got {n_pos} positives of {y.shape[0]}")
    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    s_sorted = s[order]
    tp = np.cumsum(y_sorted).astype(np.float64)
    predicted = np.arange(1, y.shape[0] + 1, dtype=np.float64)
    # keep only the last row of each tie group (one threshold per value)
    last = np.flatnonzero(np.append(s_sorted[1:] != s_sorted[:-1], True))
    precision = tp[last] / predicted[last]
    recall = tp[last] / n_pos
    recall_prev = np.concatenate(([0.0], recall[:-1]))
    return float(((recall - recall_prev) * precision).sum())


def _doc_is_anomalous(doc: Document) -> bool:
    if doc.label == 1:
        return True
    return any(w.label == 1 for w in doc.words)


def split_corpus(corpus: Corpus, train_frac: float = 0.5,
                 seed: int = 0) -> tuple[Corpus, Corpus]:
    """Draw train_frac of the normal documents as training, rest as test.

    Training never contains anomalies; test holds every anomaly plus the
    remaining normals. Document order within each side follows the input
    corpus, so the partition is reproducible and diff-friendly.
    """
    if not (0.0 < train_frac < 1.0):
        raise ParamError(
            f"train_frac must be in (0, 1), got {train_frac} "
            "(1.0 would leave no normal test documents)")
    normal_pos = [i for i, d in enumerate(corpus.documents)
                  if not _doc_is_anomalous(d)]
    if len(normal_pos) < 2:
        raise DegenerateError(
            f"split needs at least 2 normal documents, found {len(normal_pos)}")
    n_train = int(round(train_frac * len(normal_pos)))
    n_train = min(max(n_train, 1), len(normal_pos) - 1)
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(len(normal_pos))[:n_train]
    train_set = {normal_pos[i] for i in chosen}
    train_docs = tuple(d for i, d in enumerate(corpus.documents)
                       if i in train_set)
    test_docs = tuple(d for i, d in enumerate(corpus.documents)
                      if i not in train_set)
    return (Corpus(documents=train_docs, name=f"{corpus.name}|train"),
            Corpus(documents=test_docs, name=f"{corpus.name}|test"))


@dataclass(frozen=True)
class EvalReport:
    token_auroc: float
    token_auprc: float
    doc_auroc: float
    doc_auprc: float
    token_positives: int
    token_negatives: int
    doc_positives: int
    doc_negatives: int
    config: Mapping[str, object] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "token_auroc": self.token_auroc,
            "token_auprc": self.token_auprc,
            "doc_auroc": self.doc_auroc,
            "doc_auprc": self.doc_auprc,
            "counts": {
                "token_positives": self.token_positives,
                "token_negatives": self.token_negatives,
                "doc_positives": self.doc_positives,
                "doc_negatives": self.doc_negatives,
            },
            "config": dict(self.config),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def format_table(self) -> str:
        rows = [
            ("level", "auroc", "auprc", "positives", "negatives"),
            ("token", f"{self.token_auroc:.6f}", f"{self.token_auprc:.6f}",
             str(self.token_positives), str(self.token_negatives)),
            ("doc", f"{self.doc_auroc:.6f}", f"{self.doc_auprc:.6f}",
             str(self.doc_positives), str(self.doc_negatives)),
        ]
        widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                 for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


def evaluate_run(scored_docs: Sequence[ScoredDocument],
                 token_labels: Sequence[Sequence[int]],
                 doc_labels: Sequence[int],
                 config: Mapping[str, object] | None = None) -> EvalReport:
    """Compute all four metrics for one scored test set.

    Token metrics pool every test token into one ranking (never averaged
    per document). Labels must be complete and consistent: a document is
    labeled 1 exactly when at least one of its tokens is.
    """
    if not (len(scored_docs) == len(token_labels) == len(doc_labels)):
        raise SchemaError("scored docs, token labels, and doc labels must align")
    if len(scored_docs) == 0:
        raise DegenerateError("cannot evaluate an empty test set")

    all_token_scores: list[float] = []
    all_token_labels: list[int] = []
    for doc, labels, d_label in zip(scored_docs, token_labels, doc_labels):
        if d_label not in (0, 1):
            raise SchemaError(f"document {doc.doc_id!r}: label must be 0 or 1")
        if len(labels) != len(doc.token_scores):
            raise SchemaError(
                f"document {doc.doc_id!r}: {len(labels)} token labels for "
                f"{len(doc.token_scores)} token scores")
        if any(l not in (0, 1) for l in labels):
            raise SchemaError(
                f"document {doc.doc_id!r}: token labels must be 0 or 1")
        if (1 in labels) != (d_label == 1):
            raise SchemaError(
                f"document {doc.doc_id!r}: document label {d_label} is "
                "inconsistent with its token labels")
        all_token_scores.extend(doc.token_scores)
        all_token_labels.extend(labels)

    doc_scores = [d.doc_score for d in scored_docs]
    doc_label_list = list(doc_labels)
    return EvalReport(
        token_auroc=auroc(all_token_labels, all_token_scores),
        token_auprc=auprc(all_token_labels, all_token_scores),
        doc_auroc=auroc(doc_label_list, doc_scores),
        doc_auprc=auprc(doc_label_list, doc_scores),
        token_positives=sum(all_token_labels),
        token_negatives=len(all_token_labels) - sum(all_token_labels),
        doc_positives=sum(doc_label_list),
        doc_negatives=len(doc_label_list) - sum(doc_label_list),
        config=dict(config or {}),
    )
