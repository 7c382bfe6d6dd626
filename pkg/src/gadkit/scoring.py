"""Multidimensional anomaly scoring.

Each graph is summarized by a 4-D vector: mean and population standard
deviation of its per-node feature and structure reconstruction errors,
computed against the clean (unperturbed) adjacency. A small MLP is fitted
post hoc to reconstruct those vectors over the training set; a graph's
anomaly score is the per-dimension variance-normalized squared residual
of that reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import EPS, Adam, Tensor, backward, no_grad
from .errors import TooFewVectorsError, UnfittedHeadError
from .losses import feature_loss, structure_loss
from .model import decode_attributes, decode_structure, encode, normalized_adjacency

VARIANCE = "variance"
STDDEV = "stddev"


def agg_error_vector(graph, model, tau_exp=1.0):
    """The (mean_F, mean_S, std_F, std_S) summary for one graph."""
    adj = graph.adjacency()
    s = normalized_adjacency(adj)
    with no_grad():
        z = encode(graph.attrs, s, model.encoder)
        ahat = decode_structure(z, model.struct_decoder, s)
        xhat = decode_attributes(z, model.attr_decoder, s)
        f_per_node, _ = feature_loss(Tensor(graph.attrs), xhat)
        s_per_node, _ = structure_loss(adj, ahat, tau_exp=tau_exp)
    f = f_per_node.data.ravel()
    st = s_per_node.data.ravel()
    return np.array([f.mean(), st.mean(), f.std(), st.std()])


@dataclass
class ScoreHead:
    """A 4 -> hidden -> 4 reconstruction MLP plus normalization stats."""

    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor
    mu: np.ndarray = None
    sigma2: np.ndarray = None
    normalizer: str = VARIANCE

    def forward(self, v):
        h = ad.relu(ad.add(ad.matmul(v, self.w1), self.b1))
        return ad.add(ad.matmul(h, self.w2), self.b2)

    def parameters(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def matrices(self):
        return {
            "head.w1": self.w1.data,
            "head.b1": self.b1.data,
            "head.w2": self.w2.data,
            "head.b2": self.b2.data,
            "head.mu": self.mu.reshape(1, -1),
            "head.sigma2": self.sigma2.reshape(1, -1),
        }

    @staticmethod
    def from_matrices(m, normalizer=VARIANCE):
        return ScoreHead(
            w1=Tensor(m["head.w1"]),
            b1=Tensor(m["head.b1"]),
            w2=Tensor(m["head.w2"]),
            b2=Tensor(m["head.b2"]),
            mu=np.asarray(m["head.mu"]).ravel(),
            sigma2=np.asarray(m["head.sigma2"]).ravel(),
            normalizer=normalizer,
        )


def fit_score_head(train_vectors, hidden=16, steps=500, lr=1e-3, seed=0, normalizer=VARIANCE):
    """Fit the reconstruction MLP and normalization stats on training vectors.

    Deterministic for a fixed seed. Per-dimension variances are population
    variances floored at EPS.
    """
    v = np.atleast_2d(np.asarray(train_vectors, dtype=np.float64))
    n, dim = v.shape
    if n < 2:
        raise TooFewVectorsError(f"need at least 2 vectors, got {n}")
    mu = v.mean(axis=0)
    sigma2 = np.maximum(((v - mu) ** 2).mean(axis=0), EPS)

    rng = np.random.default_rng(seed)
    head = ScoreHead(
        w1=_glorot(rng, dim, hidden),
        b1=Tensor(np.zeros((1, hidden)), requires_grad=True),
        w2=_glorot(rng, hidden, dim),
        b2=Tensor(np.zeros((1, dim)), requires_grad=True),
        mu=mu,
        sigma2=sigma2,
        normalizer=normalizer,
    )
    data = Tensor(v)
    opt = Adam(head.parameters(), lr=lr)
    for _ in range(steps):
        for p in head.parameters():
            p.grad = None
        diff = ad.sub(head.forward(data), data)
        backward(ad.mean_all(ad.mul(diff, diff)))
        opt.step()
    return head


def _glorot(rng, rows, cols):
    limit = np.sqrt(6.0 / (rows + cols))
    return Tensor(rng.uniform(-limit, limit, size=(rows, cols)), requires_grad=True)


def anomaly_score(vector, head):
    """Variance-normalized squared reconstruction residual, averaged over dims."""
    if head.mu is None or head.sigma2 is None:
        raise UnfittedHeadError("score head has no normalization stats")
    v = np.asarray(vector, dtype=np.float64).reshape(1, -1)
    with no_grad():
        recon = head.forward(Tensor(v)).data
    denom = head.sigma2 if head.normalizer == VARIANCE else np.sqrt(head.sigma2)
    return float((((recon - v) ** 2).ravel() / denom).mean())


def score_graphs(graphs, model, head, tau_exp=1.0):
    """Anomaly scores and error vectors for a sequence of graphs."""
    vectors = np.array([agg_error_vector(g, model, tau_exp=tau_exp) for g in graphs])
    scores = np.array([anomaly_score(v, head) for v in vectors])
    return scores, vectors
