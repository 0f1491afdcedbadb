"""Approximate nearest-neighbor acceleration for large memory banks.

An inverted-file (IVF) index: a seeded k-means coarse quantizer splits the
bank into lists, and each query scans only the n_probes lists whose
centroids are nearest. A query equal to a bank vector always lands in
that vector's own list first, so self-matches keep score 0.0 exactly.

Construction enforces a recall contract. Held-out bank rows are queried
against a temporary index built on the remaining rows and recall@1 is
measured against an exact scan. When n_probes is left automatic the probe
count escalates until the measured recall clears the target (plus a small
safety margin); at n_probes = n_lists the index scans everything and the
check cannot fail. Explicitly pinned knobs that miss the target raise
RecallError instead of silently degrading scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bank import MemoryBank, min_sq_dists, with_index
from .errors import ParamError, RecallError

# banks below this size gain nothing from an index; keep the exact path
_MIN_INDEX_SIZE = 64

# auto mode validates against target + margin to absorb sampling noise
_RECALL_MARGIN = 0.02

# blockwise distance budget, same regime as the exact kernel
_BUDGET = 1 << 23


@dataclass(frozen=True)
class AnnParams:
    enabled: bool = False
    target_recall_at_1: float = 0.95
    n_lists: int = 0
    n_probes: int = 0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.target_recall_at_1 <= 1.0):
            raise ParamError(
                f"target_recall_at_1 must be in (0, 1], got {self.target_recall_at_1}")
        if self.n_lists < 0 or self.n_probes < 0:
            raise ParamError("n_lists and n_probes must be >= 0 (0 = auto)")


def _sq_dist_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full (len(a), len(b)) squared-distance matrix, float64, blockwise."""
    a64 = np.asarray(a, dtype=np.float64)
    b64 = np.asarray(b, dtype=np.float64)
    k, d = b64.shape
    out = np.empty((a64.shape[0], k), dtype=np.float64)
    block = max(1, _BUDGET // max(1, k * d))
    for lo in range(0, a64.shape[0], block):
        diff = a64[lo:lo + block, None, :] - b64[None, :, :]
        out[lo:lo + block] = np.einsum("qkd,qkd->qk", diff, diff)
    return out


def _kmeans(vectors: np.ndarray, n_lists: int, seed: int,
            n_iter: int = 10) -> np.ndarray:
    """Plain seeded Lloyd iterations; empty clusters keep their centroid."""
    rng = np.random.default_rng(seed)
    init = rng.choice(vectors.shape[0], size=n_lists, replace=False)
    centroids = vectors[init].astype(np.float64)
    for _ in range(n_iter):
        assign = _sq_dist_matrix(vectors, centroids).argmin(axis=1)
        for c in range(n_lists):
            members = vectors[assign == c]
            if members.shape[0] > 0:
                centroids[c] = members.mean(axis=0, dtype=np.float64)
    return centroids


class IvfIndex:
    """Coarse-quantized inverted file over a fixed vector set."""

    def __init__(self, vectors: np.ndarray, n_lists: int, n_probes: int,
                 seed: int):
        self.vectors = np.asarray(vectors, dtype=np.float64)
        self.n_lists = n_lists
        self.n_probes = min(max(1, n_probes), n_lists)
        self.seed = seed
        self.centroids = _kmeans(self.vectors, n_lists, seed)
        assign = _sq_dist_matrix(self.vectors, self.centroids).argmin(axis=1)
        self.lists = [np.flatnonzero(assign == c) for c in range(n_lists)]

    def min_sq_dists(self, queries: np.ndarray,
                     n_probes: int | None = None) -> np.ndarray:
        probes = self.n_probes if n_probes is None else min(n_probes, self.n_lists)
        qs = np.asarray(queries, dtype=np.float64)
        to_centroids = _sq_dist_matrix(qs, self.centroids)
        probe_order = np.argsort(to_centroids, axis=1, kind="stable")
        out = np.empty(qs.shape[0], dtype=np.float64)
        for i in range(qs.shape[0]):
            rows = np.concatenate(
                [self.lists[c] for c in probe_order[i, :probes]])
            if rows.size == 0:
                rows = np.arange(self.vectors.shape[0])
            diff = self.vectors[rows] - qs[i]
            out[i] = np.einsum("nd,nd->n", diff, diff).min()
        return out


def _auto_lists(n: int) -> int:
    return max(1, int(round(math.sqrt(n))))


def _probe_schedule(start: int, n_lists: int):
    probes = min(max(1, start), n_lists)
    while True:
        yield probes
        if probes >= n_lists:
            return
        probes = min(n_lists, max(probes + 1, int(math.ceil(probes * 1.4))))


def build_ann_index(bank: MemoryBank, params: AnnParams) -> MemoryBank:
    """Attach a recall-checked IVF index to the bank.

    With params.enabled false (or a bank too small to benefit) the bank is
    returned untouched and scoring stays on the exact path.
    """
    if not params.enabled:
        return bank
    n = bank.n_vectors
    if n < _MIN_INDEX_SIZE:
        return bank

    n_lists = min(params.n_lists or _auto_lists(n), n)
    auto_probes = params.n_probes == 0
    first_probes = params.n_probes or max(1, int(math.ceil(0.16 * n_lists)))

    rng = np.random.default_rng(params.seed)
    n_holdout = min(1000, max(32, n // 10), n // 2)
    holdout = rng.choice(n, size=n_holdout, replace=False)
    mask = np.zeros(n, dtype=bool)
    mask[holdout] = True
    probes_q = bank.vectors[mask].astype(np.float64)
    rest = bank.vectors[~mask]

    trial = IvfIndex(rest, min(n_lists, rest.shape[0]), first_probes,
                     params.seed)
    exact = min_sq_dists(rest, probes_q)
    goal = params.target_recall_at_1
    if auto_probes:
        goal = min(1.0, goal + _RECALL_MARGIN)

    chosen = None
    recall = 0.0
    for n_probes in _probe_schedule(first_probes, trial.n_lists):
        approx = trial.min_sq_dists(probes_q, n_probes=n_probes)
        recall = float((approx <= exact * (1.0 + 1e-9) + 1e-12).mean())
        if recall >= goal:
            chosen = n_probes
            break
        if not auto_probes:
            break
    if chosen is None:
        raise RecallError(
            f"index self-check recall@1 {recall:.4f} is below the "
            f"target {params.target_recall_at_1:.4f} with n_probes="
            f"{first_probes}; raise n_probes or leave it automatic")

    index = IvfIndex(bank.vectors, n_lists, chosen, params.seed)
    return with_index(bank, index)
