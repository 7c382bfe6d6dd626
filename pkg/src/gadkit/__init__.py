"""Contamination-robust unsupervised graph-level anomaly detection.

The package trains a graph autoencoder on a possibly contaminated
collection of graphs, denoises its encoder by fusing high-information
node embeddings from pseudo-normal graphs into every graph, separates
normal from anomalous embeddings contrastively, and scores graphs by a
variance-normalized reconstruction error of a 4-D error summary.
"""

from .autodiff import Adam, Tensor, backward, grad_check, no_grad
from .discriminator import assign_pseudo_labels, graph_similarity_scores, quantile
from .experiment import (
    ExperimentConfig,
    TrialReport,
    auroc,
    inject_noise,
    load_config,
    run_experiment,
    split_dataset,
    sweep,
)
from .graphs import (
    Dataset,
    Graph,
    SynthConfig,
    build_graph,
    degree_features,
    gen_synthetic,
    permute_nodes,
)
from .losses import contrastive_loss, feature_loss, structure_loss
from .model import GraphAutoencoder, load_checkpoint, perturb_edges, readout, save_checkpoint
from .scoring import agg_error_vector, anomaly_score, fit_score_head, score_graphs
from .training import TrainConfig, TrainHistory, train
from .tudata import parse_tudataset, validate_dataset, write_tudataset

__all__ = [
    "Adam",
    "Dataset",
    "ExperimentConfig",
    "Graph",
    "GraphAutoencoder",
    "SynthConfig",
    "Tensor",
    "TrainConfig",
    "TrainHistory",
    "TrialReport",
    "agg_error_vector",
    "anomaly_score",
    "assign_pseudo_labels",
    "auroc",
    "backward",
    "build_graph",
    "contrastive_loss",
    "degree_features",
    "feature_loss",
    "fit_score_head",
    "gen_synthetic",
    "grad_check",
    "graph_similarity_scores",
    "inject_noise",
    "load_checkpoint",
    "load_config",
    "no_grad",
    "parse_tudataset",
    "permute_nodes",
    "perturb_edges",
    "quantile",
    "readout",
    "run_experiment",
    "save_checkpoint",
    "score_graphs",
    "split_dataset",
    "structure_loss",
    "sweep",
    "train",
    "validate_dataset",
    "write_tudataset",
]

__version__ = "0.1.0"
