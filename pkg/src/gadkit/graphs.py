"""In-memory graph and dataset model plus a deterministic synthetic generator.

Graphs are undirected, unweighted, self-loop free, and immutable once
built. Edges are kept as a canonical sorted tuple of (u, v) pairs with
u < v; the dense adjacency matrix is materialized on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    InvalidConfigError,
    NotAPermutationError,
    SelfLoopError,
    ShapeMismatchError,
)


@dataclass(frozen=True)
class Graph:
    """An undirected attributed graph with a binary anomaly label."""

    n: int
    edges: tuple
    attrs: np.ndarray
    label: int

    def adjacency(self):
        """Dense symmetric 0/1 matrix with zero diagonal."""
        a = np.zeros((self.n, self.n))
        for u, v in self.edges:
            a[u, v] = 1.0
            a[v, u] = 1.0
        return a

    def degrees(self):
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    @property
    def attr_dim(self):
        return self.attrs.shape[1]

    def num_edges(self):
        return len(self.edges)


def build_graph(n, edges, attrs, label):
    """Validate and canonicalize raw graph pieces into a :class:`Graph`.

    Edge pairs are deduplicated and symmetrized ((u,v) and (v,u) collapse to
    one undirected edge). Self-loops and out-of-range endpoints are rejected.
    """
    if n <= 0:
        raise InvalidConfigError("graph needs at least one node")
    canonical = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise IndexOutOfRangeError(f"edge ({u},{v}) outside 0..{n - 1}")
        canonical.add((u, v) if u < v else (v, u))
    attrs = np.asarray(attrs, dtype=np.float64)
    if attrs.ndim != 2 or attrs.shape[0] != n:
        raise ShapeMismatchError(f"attrs shape {attrs.shape} for n={n}")
    if not np.all(np.isfinite(attrs)):
        raise InvalidConfigError("attrs contain non-finite entries")
    if label not in (0, 1):
        raise InvalidConfigError(f"label must be 0 or 1, got {label}")
    attrs = attrs.copy()
    attrs.flags.writeable = False
    return Graph(n=n, edges=tuple(sorted(canonical)), attrs=attrs, label=int(label))


def permute_nodes(g, p):
    """Relabel nodes by the permutation ``p`` (node i becomes p[i])."""
    p = [int(x) for x in p]
    if sorted(p) != list(range(g.n)):
        raise NotAPermutationError(f"not a bijection on 0..{g.n - 1}")
    edges = [(p[u], p[v]) for u, v in g.edges]
    attrs = np.empty_like(g.attrs)
    for i, target in enumerate(p):
        attrs[target] = g.attrs[i]
    return build_graph(g.n, edges, attrs, g.label)


def degree_features(g, max_deg=64):
    """Replace attributes with a one-hot of min(degree, max_deg).

    Used for datasets that ship without node attributes; the original
    attributes, if any, are discarded. The new width is ``max_deg + 1``.
    """
    if max_deg < 1:
        raise InvalidConfigError("max_deg must be >= 1")
    deg = np.minimum(g.degrees(), max_deg)
    attrs = np.zeros((g.n, max_deg + 1))
    attrs[np.arange(g.n), deg] = 1.0
    return build_graph(g.n, g.edges, attrs, g.label)


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of graphs sharing one attribute dimensionality."""

    graphs: tuple
    name: str
    attr_dim: int
    class_counts: tuple = field(default=(0, 0))

    @staticmethod
    def from_graphs(graphs, name):
        graphs = tuple(graphs)
        if not graphs:
            raise InvalidConfigError("dataset needs at least one graph")
        dims = {g.attr_dim for g in graphs}
        if len(dims) != 1:
            raise ShapeMismatchError(f"mixed attribute dims {sorted(dims)}")
        anomalies = sum(g.label for g in graphs)
        return Dataset(
            graphs=graphs,
            name=name,
            attr_dim=dims.pop(),
            class_counts=(len(graphs) - anomalies, anomalies),
        )

    def __len__(self):
        return len(self.graphs)

    def labels(self):
        return np.array([g.label for g in self.graphs], dtype=np.int64)


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the synthetic benchmark generator.

    Normal graphs are Erdos-Renyi with edge probability ``p_normal`` and
    standard Gaussian attributes; anomalies use ``p_anom`` and attributes
    mean-shifted by ``attr_shift``. Node counts are uniform over
    [nodes_lo, nodes_hi].
    """

    n_graphs: int = 300
    nodes_lo: int = 8
    nodes_hi: int = 16
    p_normal: float = 0.1
    p_anom: float = 0.3
    attr_shift: float = 1.0
    anom_frac: float = 0.2
    attr_dim: int = 8


def gen_synthetic(cfg, seed):
    """Generate a labeled dataset, bit-deterministic in (cfg, seed)."""
    if not (0.0 < cfg.p_normal < 1.0 and 0.0 < cfg.p_anom < 1.0):
        raise InvalidConfigError("edge probabilities must lie in (0, 1)")
    if not (0.0 <= cfg.anom_frac < 1.0):
        raise InvalidConfigError("anom_frac must lie in [0, 1)")
    if cfg.n_graphs < 1 or cfg.nodes_lo < 1 or cfg.nodes_hi < cfg.nodes_lo:
        raise InvalidConfigError("bad graph or node counts")
    if cfg.attr_dim < 1:
        raise InvalidConfigError("attr_dim must be >= 1")

    rng = np.random.default_rng(seed)
    n_anom = int(round(cfg.anom_frac * cfg.n_graphs))
    labels = np.zeros(cfg.n_graphs, dtype=np.int64)
    labels[:n_anom] = 1
    rng.shuffle(labels)

    graphs = []
    for label in labels:
        n = int(rng.integers(cfg.nodes_lo, cfg.nodes_hi + 1))
        p = cfg.p_anom if label else cfg.p_normal
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < p
        edges = list(zip(iu[mask].tolist(), ju[mask].tolist()))
        attrs = rng.standard_normal((n, cfg.attr_dim))
        if label:
            attrs = attrs + cfg.attr_shift
        graphs.append(build_graph(n, edges, attrs, int(label)))
    return Dataset.from_graphs(graphs, name="synthetic")
