"""Graph-level similarity scoring and quantile pseudo-labeling.

Each graph embedding receives a similarity score: its mean cosine against
every other embedding in the batch (self excluded). Graphs whose score
falls below the alpha-quantile of the score distribution are provisionally
labeled anomalous. Everything here works on plain arrays; no gradients
are involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import EPS
from .errors import EmptyVectorError, TooFewGraphsError


def graph_similarity_scores(z_graphs):
    """Mean pairwise cosine of each row against all other rows.

    Row norms are floored at EPS, so zero rows score zero against
    everything rather than dividing by zero.
    """
    z = np.asarray(z_graphs, dtype=np.float64)
    m = z.shape[0]
    if m < 2:
        raise TooFewGraphsError("similarity needs at least two graphs")
    norms = np.maximum(np.linalg.norm(z, axis=1, keepdims=True), EPS)
    unit = z / norms
    gram = unit @ unit.T
    return (gram.sum(axis=1) - np.diag(gram)) / (m - 1)


def quantile(values, q):
    """Lower-tail empirical quantile with linear interpolation."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise EmptyVectorError("quantile of empty vector")
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"quantile level {q} outside [0, 1]")
    return float(np.quantile(values, q, method="linear"))


@dataclass(frozen=True)
class PseudoLabels:
    eta: np.ndarray
    threshold: float
    labels: np.ndarray  # 1 = provisionally anomalous
    alpha: float

    def normal_indices(self):
        return np.flatnonzero(self.labels == 0)

    def flagged_count(self):
        return int(self.labels.sum())


def assign_pseudo_labels(eta, alpha):
    """Label graphs below the alpha-quantile of eta as anomalous.

    Ties with the threshold stay normal (the >= branch wins), so alpha=0
    flags nothing and equal scores all stay normal.
    """
    eta = np.asarray(eta, dtype=np.float64)
    threshold = quantile(eta, alpha)
    labels = (eta < threshold).astype(np.int64)
    return PseudoLabels(eta=eta, threshold=threshold, labels=labels, alpha=float(alpha))
