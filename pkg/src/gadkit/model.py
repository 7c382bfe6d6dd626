"""Graph autoencoder: perturbation, GCN encoder, structure and attribute decoders.

The encoder applies L rounds of symmetric-normalized graph convolution
(self-loops added) with ReLU between layers and a linear last layer. The
structure decoder maps node embeddings through one more convolution and a
linear projection to an inner-product edge-probability matrix; the
attribute decoder mirrors that with output width equal to the input
attribute dimensionality. Decoders convolve over the same (possibly
perturbed) adjacency the encoder saw, never over the clean reconstruction
target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import EPS, Tensor
from .errors import EmptyGraphError, InvalidConfigError, ShapeMismatchError


@dataclass
class EncoderParams:
    weights: list  # [in_dim x hidden, then hidden x hidden] * (layers - 1)


@dataclass
class DecoderParams:
    conv_w: Tensor
    lin_w: Tensor


def _glorot(rng, rows, cols):
    limit = np.sqrt(6.0 / (rows + cols))
    return Tensor(rng.uniform(-limit, limit, size=(rows, cols)), requires_grad=True)


class GraphAutoencoder:
    """Holds all trainable parameter matrices and the forward passes."""

    def __init__(self, in_dim, hidden_dim=64, layers=2, rng=None):
        if layers < 1:
            raise InvalidConfigError("encoder needs at least one layer")
        if rng is None:
            rng = np.random.default_rng(0)
        dims = [in_dim] + [hidden_dim] * layers
        self.in_dim = in_dim
        self.hidden_dim = hidden_dim
        self.layers = layers
        self.encoder = EncoderParams(
            weights=[_glorot(rng, dims[i], dims[i + 1]) for i in range(layers)]
        )
        self.struct_decoder = DecoderParams(
            conv_w=_glorot(rng, hidden_dim, hidden_dim),
            lin_w=_glorot(rng, hidden_dim, hidden_dim),
        )
        self.attr_decoder = DecoderParams(
            conv_w=_glorot(rng, hidden_dim, hidden_dim),
            lin_w=_glorot(rng, hidden_dim, in_dim),
        )

    def encoder_parameters(self):
        return list(self.encoder.weights)

    def parameters(self):
        return (
            self.encoder_parameters()
            + [self.struct_decoder.conv_w, self.struct_decoder.lin_w]
            + [self.attr_decoder.conv_w, self.attr_decoder.lin_w]
        )

    def named_parameters(self):
        named = {}
        for i, w in enumerate(self.encoder.weights):
            named[f"encoder.w{i}"] = w
        named["struct.conv"] = self.struct_decoder.conv_w
        named["struct.lin"] = self.struct_decoder.lin_w
        named["attr.conv"] = self.attr_decoder.conv_w
        named["attr.lin"] = self.attr_decoder.lin_w
        return named

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None


def normalized_adjacency(adj):
    """Symmetric normalization with added self-loops: D^-1/2 (A+I) D^-1/2."""
    n = adj.shape[0]
    a = adj + np.eye(n)
    dinv = 1.0 / np.sqrt(a.sum(axis=1))
    return a * dinv[:, None] * dinv[None, :]


def perturb_edges(graph, drop_rate, rng):
    """Adjacency of ``graph`` with each undirected edge dropped independently.

    Symmetry is preserved (an edge survives or dies as a whole). The result
    is a plain dense matrix; determinism follows the supplied generator.
    """
    if not (0.0 <= drop_rate < 1.0):
        raise InvalidConfigError("drop_rate must lie in [0, 1)")
    a = np.zeros((graph.n, graph.n))
    if graph.edges:
        keep = rng.random(len(graph.edges)) >= drop_rate
        for (u, v), k in zip(graph.edges, keep):
            if k:
                a[u, v] = 1.0
                a[v, u] = 1.0
    return a


def encode(attrs, norm_adj, encoder):
    """Node embeddings from L graph-convolution layers.

    ``attrs`` may be a Tensor or array; ``norm_adj`` is the pre-normalized
    propagation matrix for the (possibly perturbed) adjacency in play.
    """
    h = attrs if isinstance(attrs, Tensor) else Tensor(attrs)
    if h.shape[0] != norm_adj.shape[0]:
        raise ShapeMismatchError(f"{h.shape[0]} attr rows vs {norm_adj.shape[0]} nodes")
    s = Tensor(norm_adj)
    last = len(encoder.weights) - 1
    for i, w in enumerate(encoder.weights):
        h = ad.matmul(ad.matmul(s, h), w)
        if i != last:
            h = ad.relu(h)
    return h


def _decode_hidden(z_node, params, norm_adj):
    s = Tensor(norm_adj)
    h = ad.relu(ad.matmul(ad.matmul(s, z_node), params.conv_w))
    return ad.matmul(h, params.lin_w)


def decode_structure(z_node, params, norm_adj):
    """Edge-probability matrix, symmetric and clamped into [EPS, 1-EPS]."""
    h = _decode_hidden(z_node, params, norm_adj)
    logits = ad.matmul(h, ad.transpose(h))
    logits = ad.scale(ad.add(logits, ad.transpose(logits)), 0.5)
    return ad.clamp(ad.sigmoid(logits), EPS, 1.0 - EPS)


def decode_attributes(z_node, params, norm_adj):
    """Reconstructed attribute matrix, width equal to the input dim."""
    return _decode_hidden(z_node, params, norm_adj)


def readout(z_node):
    """Mean-pool node embeddings into a single 1 x hidden row."""
    if z_node.shape[0] < 1:
        raise EmptyGraphError("readout of zero nodes")
    return ad.colmean(z_node)


# --- checkpoint io ------------------------------------------------------------
#
# Text format, one parameter section per matrix, values as C99 float hex so
# round-trips are bit exact:
#
#   gadkit-checkpoint 1
#   meta <key> <value>            (repeated; in_dim/hidden_dim/layers ...)
#   param <name> <rows> <cols>    (followed by <rows> lines of <cols> hex floats)

FORMAT_TAG = "gadkit-checkpoint"
FORMAT_VERSION = 1


def _write_matrix(fh, name, data):
    rows, cols = data.shape
    fh.write(f"param {name} {rows} {cols}\n")
    for row in data:
        fh.write(" ".join(float(x).hex() for x in row) + "\n")


def save_checkpoint(path, model, extra_matrices=None, meta=None):
    """Dump all parameter matrices (and optional named extras) to ``path``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{FORMAT_TAG} {FORMAT_VERSION}\n")
        base_meta = {
            "in_dim": model.in_dim,
            "hidden_dim": model.hidden_dim,
            "layers": model.layers,
        }
        if meta:
            base_meta.update(meta)
        for key, value in base_meta.items():
            fh.write(f"meta {key} {value}\n")
        for name, tensor in model.named_parameters().items():
            _write_matrix(fh, name, tensor.data)
        for name, data in (extra_matrices or {}).items():
            _write_matrix(fh, name, np.atleast_2d(np.asarray(data, dtype=np.float64)))


def load_checkpoint(path):
    """Read a checkpoint into (model, extra_matrices, meta)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != FORMAT_TAG:
            raise InvalidConfigError(f"{path}: not a checkpoint file")
        if int(header[1]) != FORMAT_VERSION:
            raise InvalidConfigError(f"{path}: unsupported version {header[1]}")
        meta = {}
        matrices = {}
        line = fh.readline()
        while line:
            parts = line.split()
            if parts[0] == "meta":
                meta[parts[1]] = parts[2]
                line = fh.readline()
            elif parts[0] == "param":
                name, rows, cols = parts[1], int(parts[2]), int(parts[3])
                data = np.empty((rows, cols))
                for r in range(rows):
                    data[r] = [float.fromhex(tok) for tok in fh.readline().split()]
                matrices[name] = data
                line = fh.readline()
            else:
                raise InvalidConfigError(f"{path}: unexpected line {line!r}")

    model = GraphAutoencoder(
        in_dim=int(meta["in_dim"]),
        hidden_dim=int(meta["hidden_dim"]),
        layers=int(meta["layers"]),
    )
    extras = {}
    named = model.named_parameters()
    for name, data in matrices.items():
        if name in named:
            named[name].data = data
        else:
            extras[name] = data
    return model, extras, meta
