"""Adversarial alternating training.

Each epoch runs three phases: (1) full-batch reconstruction steps that
update encoder and decoders together; (2) a gradient-free refresh that
recomputes graph embeddings on clean adjacencies, reassigns pseudo-labels,
rebuilds the anchor bank from pseudo-normal graphs, and samples the
positive/negative pools; (3) contrastive steps that ascend the similarity
objective with respect to the encoder only, leaving both decoders frozen.
Setting the adversarial weight to zero turns phase 3 off and the pipeline
degenerates to a plain graph autoencoder.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Adam, Tensor, backward, no_grad
from .autodiff import _check_finite
from .anchors import (
    SOFTMAX_NORMALIZED,
    mixup_fuse_fixed,
    node_info_scores,
    sample_pools,
    select_topk_nodes,
)
from .discriminator import assign_pseudo_labels, graph_similarity_scores
from .errors import InvalidConfigError, NoNormalGraphsError
from .losses import contrastive_loss, feature_loss, structure_loss
from .model import (
    GraphAutoencoder,
    decode_attributes,
    decode_structure,
    encode,
    normalized_adjacency,
    perturb_edges,
    readout,
)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    s1_steps: int = 1
    s2_steps: int = 1
    w: float = 200.0
    lr: float = 1e-3
    drop_rate: float = 0.1
    alpha: float = 0.15
    k: int = 256
    lam_lo: float = 0.7
    lam_hi: float = 0.9
    K: int = 20
    beta1: float = 0.9
    beta2: float = 0.1
    temp: float = 0.5
    tau_exp: float = 1.0
    seed: int = 0
    mixup_mode: str = SOFTMAX_NORMALIZED
    hidden_dim: int = 64
    layers: int = 2

    def validate(self):
        if self.epochs < 0 or self.s1_steps < 1 or self.s2_steps < 1:
            raise InvalidConfigError("epochs must be >= 0 and step counts >= 1")
        if self.w < 0:
            raise InvalidConfigError("adversarial weight must be >= 0")
        if not (0.0 <= self.drop_rate < 1.0):
            raise InvalidConfigError("drop_rate must lie in [0, 1)")
        if not (0.0 <= self.alpha <= 1.0):
            raise InvalidConfigError("alpha must lie in [0, 1]")
        if not (0.0 <= self.lam_lo <= self.lam_hi <= 1.0):
            raise InvalidConfigError("lambda interval must sit inside [0, 1]")
        if self.temp <= 0:
            raise InvalidConfigError("temperature must be positive")
        return self


@dataclass
class TrainHistory:
    recon: list = field(default_factory=list)
    cont: list = field(default_factory=list)
    flagged: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    def write_csv(self, fh):
        fh.write("epoch,L_recon,L_cont,flagged_count,seconds\n")
        rows = zip(self.recon, self.cont, self.flagged, self.seconds)
        for epoch, (r, c, n, s) in enumerate(rows):
            fh.write(f"{epoch},{r!r},{c!r},{n},{s!r}\n")


def _graph_cache(graphs):
    """Clean adjacency, its normalization, and attribute tensors, once."""
    cache = []
    for g in graphs:
        adj = g.adjacency()
        cache.append((g, adj, normalized_adjacency(adj), Tensor(g.attrs)))
    return cache


def _reconstruction_loss(model, cache, cfg, rng):
    terms = []
    for g, adj, norm_clean, attrs in cache:
        if cfg.drop_rate > 0.0 and g.edges:
            norm = normalized_adjacency(perturb_edges(g, cfg.drop_rate, rng))
        else:
            norm = norm_clean
        z = encode(attrs, norm, model.encoder)
        ahat = decode_structure(z, model.struct_decoder, norm)
        xhat = decode_attributes(z, model.attr_decoder, norm)
        _, lf = feature_loss(attrs, xhat)
        _, ls = structure_loss(adj, ahat, tau_exp=cfg.tau_exp)
        terms.append(ad.add(lf, ls))
    return ad.mean_all(ad.concat_rows(terms))


def stage1_step(model, cache, optimizer, cfg, rng):
    """One reconstruction descent step over all parameters; returns the loss."""
    model.zero_grad()
    loss = _reconstruction_loss(model, cache, cfg, rng)
    backward(loss)
    optimizer.step()
    return loss.item()


def refresh_embeddings(model, cache):
    """Gradient-free node embeddings and graph readouts on clean adjacencies."""
    node_embeddings = []
    graph_rows = []
    with no_grad():
        for _, _, norm, attrs in cache:
            z = encode(attrs, norm, model.encoder)
            node_embeddings.append(z.data)
            graph_rows.append(readout(z).data[0])
    return node_embeddings, np.array(graph_rows)


def build_epoch_state(model, cache, cfg, rng):
    """Pseudo-labels, anchor bank, and sample pools for the coming epoch."""
    node_embeddings, graph_embeddings = refresh_embeddings(model, cache)
    eta = graph_similarity_scores(graph_embeddings)
    pseudo = assign_pseudo_labels(eta, cfg.alpha)
    normal_ids = [int(i) for i in pseudo.normal_indices()]
    if not normal_ids:
        raise NoNormalGraphsError("discriminator flagged every training graph")
    normal_nodes = [node_embeddings[i] for i in normal_ids]
    scores = node_info_scores(normal_nodes, graph_embeddings[normal_ids])
    bank = select_topk_nodes(scores, normal_nodes, normal_ids, cfg.k)
    pools = sample_pools(eta, cfg.beta1, cfg.beta2, cfg.K, rng)
    return pseudo, bank, pools


def stage2_step(model, cache, bank, pools, cfg, lam):
    """One contrastive ascent step on the encoder only; returns the loss.

    The update is plain gradient ascent scaled by lr * w, so the
    adversarial weight directly balances this phase against the
    Adam-paced reconstruction phase.
    """
    for p in model.encoder_parameters():
        p.grad = None
    queries = []
    anchors = []
    for _, _, norm, attrs in cache:
        z = encode(attrs, norm, model.encoder)
        fused = mixup_fuse_fixed(z, bank, lam, mode=cfg.mixup_mode)
        queries.append(readout(fused))
        anchors.append(readout(z).data[0])
    anchors = np.array(anchors)
    z_graphs = ad.concat_rows(queries)
    loss = contrastive_loss(
        z_graphs, anchors[list(pools.positives)], anchors[list(pools.negatives)], cfg.temp
    )
    if cfg.w > 0.0:
        backward(ad.scale(loss, -cfg.w))
        for p in model.encoder_parameters():
            p.data = p.data - cfg.lr * p.grad
            _check_finite(p.data, "stage2 step")
    return loss.item()


def train(graphs, cfg):
    """Run the full alternating schedule over a training split.

    Deterministic in (graphs, cfg): a single generator seeded from
    cfg.seed drives initialization, perturbation, lambda draws, and pool
    sampling in a fixed order. Returns (model, history, last anchor bank).
    """
    graphs = list(graphs)
    if not graphs:
        raise InvalidConfigError("training split is empty")
    cfg = cfg if isinstance(cfg, TrainConfig) else TrainConfig(**cfg)
    cfg.validate()

    rng = np.random.default_rng(cfg.seed)
    model = GraphAutoencoder(
        in_dim=graphs[0].attr_dim,
        hidden_dim=cfg.hidden_dim,
        layers=cfg.layers,
        rng=rng,
    )
    cache = _graph_cache(graphs)
    opt_all = Adam(model.parameters(), lr=cfg.lr)
    history = TrainHistory()
    bank = None

    for _ in range(cfg.epochs):
        started = time.perf_counter()
        lam = float(rng.uniform(cfg.lam_lo, cfg.lam_hi))

        recon = 0.0
        for _ in range(cfg.s1_steps):
            recon = stage1_step(model, cache, opt_all, cfg, rng)

        pseudo, bank, pools = build_epoch_state(model, cache, cfg, rng)

        cont = float("nan")
        if cfg.w > 0.0:
            for _ in range(cfg.s2_steps):
                cont = stage2_step(model, cache, bank, pools, cfg, lam)

        history.recon.append(recon)
        history.cont.append(cont)
        history.flagged.append(pseudo.flagged_count())
        history.seconds.append(time.perf_counter() - started)

    if bank is None:
        # zero-epoch call still reports a bank so downstream code can run
        _, bank, _ = build_epoch_state(model, cache, cfg, rng)
    return model, history, bank
