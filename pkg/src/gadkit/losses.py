"""Reconstruction and contrastive objectives.

Three losses drive training: a per-node cosine distance between original
and reconstructed attributes, an imbalance-weighted binary cross-entropy
between the clean adjacency and the predicted edge probabilities, and a
temperature-scaled contrastive objective over graph embeddings against
positive/negative anchor sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import EPS, Tensor
from .errors import EmptyAnchorSetError, NonBinaryAdjacencyError, ShapeMismatchError


@dataclass
class ReconErrors:
    """Per-node error vectors and their scalar means for one graph."""

    feature_per_node: np.ndarray
    structure_per_node: np.ndarray
    feature_total: float
    structure_total: float


def feature_loss(x, xhat):
    """Mean per-node (1 - cosine) between rows of x and xhat.

    Rows where either side has zero norm contribute nothing but still count
    toward the denominator. Returns (per_node nx1, total 1x1) tensors;
    gradients flow into both arguments.
    """
    if x.shape != xhat.shape:
        raise ShapeMismatchError(f"feature_loss {x.shape} vs {xhat.shape}")
    cos = ad.cosine_rows(x, xhat)
    live = (np.linalg.norm(x.data, axis=1) > 0) & (
        np.linalg.norm(xhat.data, axis=1) > 0
    )
    mask = Tensor(live.astype(np.float64).reshape(-1, 1))
    per_node = ad.mul(ad.add_scalar(ad.scale(cos, -1.0), 1.0), mask)
    return per_node, ad.mean_all(per_node)


def edge_weight(adj, tau_exp):
    """Positive-class weight: (#edges / #non-edges) ** tau_exp."""
    total = adj.sum()
    nonedges = adj.size - total
    ratio = total / nonedges if nonedges > 0 else 1.0 / EPS
    if ratio == 0.0:
        return 0.0 if tau_exp > 0 else 1.0
    return float(ratio**tau_exp)


def structure_loss(adj, ahat, tau_exp=1.0):
    """Weighted BCE between a binary adjacency and predicted probabilities.

    The positive term is scaled by ``edge_weight(adj, tau_exp)``; entries
    average over all n^2 cells and the per-node vector is the row mean.
    ``ahat`` must already be clamped into (0, 1).
    """
    adj = np.asarray(adj, dtype=np.float64)
    if adj.shape != ahat.shape:
        raise ShapeMismatchError(f"structure_loss {adj.shape} vs {ahat.shape}")
    if not np.all((adj == 0.0) | (adj == 1.0)):
        raise NonBinaryAdjacencyError("adjacency entries must be 0 or 1")
    if not np.array_equal(adj, adj.T):
        raise NonBinaryAdjacencyError("adjacency must be symmetric")
    omega = edge_weight(adj, tau_exp)
    a = Tensor(adj)
    pos = ad.mul(a, ad.log(ahat))
    neg = ad.mul(Tensor(1.0 - adj), ad.log(ad.add_scalar(ad.scale(ahat, -1.0), 1.0)))
    bce = ad.scale(ad.add(ad.scale(pos, omega), neg), -1.0)
    return ad.rowmean(bce), ad.mean_all(bce)


def contrastive_loss(z_graphs, z_pos, z_neg, temp):
    """Log-ratio of positive to total anchor affinity, averaged over graphs.

    Anchor matrices are treated as constants (no gradient); only
    ``z_graphs`` is optimized. The value lies in (-inf, 0), approaching 0
    as embeddings align with positives and repel negatives.
    """
    if temp <= 0:
        raise ShapeMismatchError("temperature must be positive")
    z_pos = np.atleast_2d(np.asarray(z_pos, dtype=np.float64))
    z_neg = np.atleast_2d(np.asarray(z_neg, dtype=np.float64))
    if z_pos.shape[0] < 1 or z_neg.shape[0] < 1:
        raise EmptyAnchorSetError("need at least one positive and one negative anchor")
    if z_pos.shape[1] != z_graphs.shape[1] or z_neg.shape[1] != z_graphs.shape[1]:
        raise ShapeMismatchError("anchor width differs from embedding width")

    zn = ad.l2_normalize_rows(z_graphs)
    pos_n = _unit_rows(z_pos)
    neg_n = _unit_rows(z_neg)
    l_pos = ad.rowsum(ad.exp(ad.scale(ad.matmul(zn, Tensor(pos_n.T)), 1.0 / temp)))
    l_neg = ad.rowsum(ad.exp(ad.scale(ad.matmul(zn, Tensor(neg_n.T)), 1.0 / temp)))
    ratio = ad.sub(ad.log(l_pos), ad.log(ad.add(l_pos, l_neg)))
    return ad.mean_all(ratio)


def _unit_rows(m):
    norms = np.maximum(np.linalg.norm(m, axis=1, keepdims=True), EPS)
    return m / norms
