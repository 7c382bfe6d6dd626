"""Denoising machinery: anchor selection, mixup fusion, and pool sampling.

High-information node embeddings are those most aligned (on average) with
the graph-level embeddings of pseudo-normal graphs. The top k of them form
an anchor bank that gets blended into every graph's node embeddings
through an attention-style mixup. Positive/negative graph pools for the
contrastive stage are drawn from the extremes of the similarity-score
distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import EPS, Tensor
from .discriminator import quantile
from .errors import (
    DegeneratePoolsError,
    EmptyBankError,
    InvalidConfigError,
    NoNormalGraphsError,
)

SOFTMAX_NORMALIZED = "softmax_normalized"
VERBATIM = "verbatim"


def node_info_scores(node_embeddings, graph_embeddings):
    """Mean cosine of every node against each normal graph embedding.

    ``node_embeddings`` is a list of per-graph (n_i x d) arrays drawn from
    pseudo-normal graphs; ``graph_embeddings`` stacks those graphs'
    readouts. Returns one score array per input graph.
    """
    if len(node_embeddings) == 0:
        raise NoNormalGraphsError("no pseudo-normal graphs to score against")
    g = np.atleast_2d(np.asarray(graph_embeddings, dtype=np.float64))
    g_unit = g / np.maximum(np.linalg.norm(g, axis=1, keepdims=True), EPS)
    scores = []
    for z in node_embeddings:
        z = np.asarray(z, dtype=np.float64)
        z_unit = z / np.maximum(np.linalg.norm(z, axis=1, keepdims=True), EPS)
        scores.append((z_unit @ g_unit.T).mean(axis=1))
    return scores


@dataclass(frozen=True)
class AnchorBank:
    z_topk: np.ndarray  # k x d
    sources: tuple  # (graph index, node index) per row
    k: int  # effective size, may be below the requested k

    def __len__(self):
        return self.z_topk.shape[0]


def select_topk_nodes(scores, node_embeddings, graph_ids, k):
    """Pick the k globally highest-scoring node embeddings.

    Ties break by ascending (graph id, node id). When fewer than k nodes
    exist, all are taken and the bank records the effective k.
    """
    if k < 1:
        raise InvalidConfigError("k must be >= 1")
    entries = []
    for scores_i, z_i, gid in zip(scores, node_embeddings, graph_ids):
        for node_id, s in enumerate(scores_i):
            entries.append((-float(s), gid, node_id))
    entries.sort()
    take = entries[: min(k, len(entries))]
    by_graph = {gid: np.asarray(z) for z, gid in zip(node_embeddings, graph_ids)}
    rows = np.vstack([by_graph[gid][nid] for _, gid, nid in take])
    return AnchorBank(
        z_topk=rows,
        sources=tuple((gid, nid) for _, gid, nid in take),
        k=len(take),
    )


def mixup_fuse_fixed(z_node, bank, lam, mode=SOFTMAX_NORMALIZED):
    """Blend node embeddings with anchor mixtures at a fixed coefficient.

    The affinity matrix T = Z Bank^T is row-softmaxed in the default mode
    so each node receives a convex combination of anchors; verbatim mode
    keeps the raw products. Output is lam * Z + (1 - lam) * T Bank, and
    only Z carries gradient.
    """
    if len(bank) == 0:
        raise EmptyBankError("anchor bank is empty")
    if not (0.0 <= lam <= 1.0):
        raise InvalidConfigError(f"lambda {lam} outside [0, 1]")
    if mode not in (SOFTMAX_NORMALIZED, VERBATIM):
        raise InvalidConfigError(f"unknown mixup mode {mode!r}")
    if lam == 1.0:
        return z_node
    bank_t = Tensor(bank.z_topk)
    t = ad.matmul(z_node, ad.transpose(bank_t))
    if mode == SOFTMAX_NORMALIZED:
        t = ad.softmax_rows(t)
    blended = ad.matmul(t, bank_t)
    return ad.add(ad.scale(z_node, lam), ad.scale(blended, 1.0 - lam))


def mixup_fuse(z_node, bank, lam_interval, rng, mode=SOFTMAX_NORMALIZED):
    """Draw lambda uniformly from the interval, then fuse."""
    lo, hi = lam_interval
    if lo > hi:
        raise InvalidConfigError(f"bad lambda interval [{lo}, {hi}]")
    lam = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
    return mixup_fuse_fixed(z_node, bank, lam, mode=mode)


@dataclass(frozen=True)
class SamplePools:
    positives: tuple  # graph indices with high similarity
    negatives: tuple  # graph indices with low similarity
    beta1: float
    beta2: float
    with_replacement: bool


def sample_pools(eta, beta1, beta2, count, rng):
    """Sample ``count`` graph ids from the high and low similarity regions.

    Positives come from strictly above the beta1 lower-quantile of eta,
    negatives from strictly below the beta2 lower-quantile. A region
    smaller than ``count`` is sampled with replacement and flagged.
    """
    if not (0.0 < beta2 < beta1 < 1.0):
        raise InvalidConfigError(f"need 0 < beta2 < beta1 < 1, got {beta1}, {beta2}")
    if count < 1:
        raise InvalidConfigError("count must be >= 1")
    eta = np.asarray(eta, dtype=np.float64)
    hi_region = np.flatnonzero(eta > quantile(eta, beta1))
    lo_region = np.flatnonzero(eta < quantile(eta, beta2))
    if hi_region.size == 0 or lo_region.size == 0:
        raise DegeneratePoolsError(
            f"similarity regions hold {hi_region.size} high / {lo_region.size} low graphs"
        )
    with_replacement = hi_region.size < count or lo_region.size < count
    positives = rng.choice(hi_region, size=count, replace=hi_region.size < count)
    negatives = rng.choice(lo_region, size=count, replace=lo_region.size < count)
    return SamplePools(
        positives=tuple(int(i) for i in positives),
        negatives=tuple(int(i) for i in negatives),
        beta1=float(beta1),
        beta2=float(beta2),
        with_replacement=with_replacement,
    )
