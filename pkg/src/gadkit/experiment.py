"""Experiment orchestration: splits, contamination, AUROC, trials, sweeps.

The evaluation protocol splits normal graphs 80/10/10 into train/val/test
and sends 5% of anomalies to val and another 5% to test; the remaining
anomalies form an injection pool from which contamination is drawn at rate
beta (relative to the number of normal training graphs). Each trial uses
its own seed (master seed + trial index) for the split, the injection,
model initialization, and the scoring head, so adding trials never
disturbs earlier ones. All tabular outputs are CSV with a header row and
are byte-stable for a fixed (config, seed).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    EmptyGridError,
    PoolExhaustedError,
    SingleClassDatasetError,
    SingleClassLabelsError,
)
from .graphs import SynthConfig, gen_synthetic
from .model import load_checkpoint, save_checkpoint
from .scoring import VARIANCE, ScoreHead, agg_error_vector, fit_score_head, score_graphs
from .training import TrainConfig, refresh_embeddings, train, _graph_cache
from .tudata import MINORITY, parse_tudataset

TRAIN, VAL, TEST, UNUSED = "train", "val", "test", "unused"


def _round_half_up(x):
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class SplitSpec:
    assignment: tuple  # one of train/val/test/unused per graph
    train_ids: tuple  # normal training graphs (pre-injection)
    val_ids: tuple
    test_ids: tuple
    pool_ids: tuple  # anomalies available for injection
    seed: int


def split_dataset(dataset, seed):
    """Protocol split: normals 80/10/10, anomalies 5% val + 5% test."""
    labels = dataset.labels()
    normals = np.flatnonzero(labels == 0)
    anomalies = np.flatnonzero(labels == 1)
    if normals.size == 0 or anomalies.size == 0:
        raise SingleClassDatasetError(
            f"dataset has {normals.size} normals and {anomalies.size} anomalies"
        )
    rng = np.random.default_rng(seed)
    normals = normals[rng.permutation(normals.size)]
    anomalies = anomalies[rng.permutation(anomalies.size)]

    n_val = _round_half_up(0.1 * normals.size)
    n_test = _round_half_up(0.1 * normals.size)
    train_n = normals[: normals.size - n_val - n_test]
    val_n = normals[normals.size - n_val - n_test : normals.size - n_test]
    test_n = normals[normals.size - n_test :]

    a_val = _round_half_up(0.05 * anomalies.size)
    a_test = _round_half_up(0.05 * anomalies.size)
    val_a = anomalies[:a_val]
    test_a = anomalies[a_val : a_val + a_test]
    pool = anomalies[a_val + a_test :]

    assignment = [UNUSED] * len(dataset)
    for i in train_n:
        assignment[i] = TRAIN
    for i in np.concatenate([val_n, val_a]):
        assignment[i] = VAL
    for i in np.concatenate([test_n, test_a]):
        assignment[i] = TEST
    return SplitSpec(
        assignment=tuple(assignment),
        train_ids=tuple(int(i) for i in sorted(train_n)),
        val_ids=tuple(int(i) for i in sorted(np.concatenate([val_n, val_a]))),
        test_ids=tuple(int(i) for i in sorted(np.concatenate([test_n, test_a]))),
        pool_ids=tuple(int(i) for i in sorted(pool)),
        seed=int(seed),
    )


def inject_noise(split, beta, seed):
    """Contaminated training id list: round(beta * #train normals) anomalies."""
    if not (0.0 <= beta < 1.0):
        raise ConfigError(f"beta {beta} outside [0, 1)")
    need = _round_half_up(beta * len(split.train_ids))
    if need == 0:
        return list(split.train_ids)
    if need > len(split.pool_ids):
        raise PoolExhaustedError(
            f"need {need} anomalies but the pool holds {len(split.pool_ids)}"
        )
    rng = np.random.default_rng(seed)
    injected = rng.choice(np.array(split.pool_ids), size=need, replace=False)
    return sorted(list(split.train_ids) + [int(i) for i in injected])


def auroc(scores, labels):
    """Probability a random anomaly outscores a random normal; ties count 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = int((labels == 1).sum())
    neg = int((labels == 0).sum())
    if pos == 0 or neg == 0:
        raise SingleClassLabelsError(f"labels have {pos} positives and {neg} negatives")
    ranks = _tied_ranks(scores)
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - pos * (pos + 1) / 2.0) / (pos * neg))


def _tied_ranks(x):
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(x.size)
    sorted_x = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


# --- configuration -----------------------------------------------------------

@dataclass
class ExperimentConfig:
    dataset: str = "synthetic"
    name: str = None
    anomaly_class: object = MINORITY
    append_node_labels: bool = False
    max_degree: int = 64
    synth_n_graphs: int = 300
    synth_nodes_lo: int = 8
    synth_nodes_hi: int = 16
    synth_p_normal: float = 0.1
    synth_p_anom: float = 0.3
    synth_attr_shift: float = 1.0
    synth_anom_frac: float = 0.2
    synth_attr_dim: int = 8
    beta: float = 0.0
    trials: int = 5
    seed: int = 0
    epochs: int = 100
    s1_steps: int = 1
    s2_steps: int = 1
    w: float = 200.0
    lr: float = 1e-3
    drop_rate: float = 0.1
    alpha: float = None  # resolved to beta when contaminated, else 0.15
    k: int = 256
    lam_lo: float = 0.7
    lam_hi: float = 0.9
    K: int = 20
    beta1: float = 0.9
    beta2: float = 0.1
    temp: float = 0.5
    tau_exp: float = 1.0
    mixup_mode: str = "softmax_normalized"
    hidden_dim: int = 64
    layers: int = 2
    head_hidden: int = 16
    head_steps: int = 500
    normalizer: str = VARIANCE
    dump_embeddings: bool = False
    grid: dict = None

    def resolved_alpha(self):
        if self.alpha is not None:
            return self.alpha
        return self.beta if self.beta > 0 else 0.15

    def train_config(self, seed):
        return TrainConfig(
            epochs=self.epochs,
            s1_steps=self.s1_steps,
            s2_steps=self.s2_steps,
            w=self.w,
            lr=self.lr,
            drop_rate=self.drop_rate,
            alpha=self.resolved_alpha(),
            k=self.k,
            lam_lo=self.lam_lo,
            lam_hi=self.lam_hi,
            K=self.K,
            beta1=self.beta1,
            beta2=self.beta2,
            temp=self.temp,
            tau_exp=self.tau_exp,
            seed=seed,
            mixup_mode=self.mixup_mode,
            hidden_dim=self.hidden_dim,
            layers=self.layers,
        ).validate()

    def synth_config(self):
        return SynthConfig(
            n_graphs=self.synth_n_graphs,
            nodes_lo=self.synth_nodes_lo,
            nodes_hi=self.synth_nodes_hi,
            p_normal=self.synth_p_normal,
            p_anom=self.synth_p_anom,
            attr_shift=self.synth_attr_shift,
            anom_frac=self.synth_anom_frac,
            attr_dim=self.synth_attr_dim,
        )

    def snapshot(self):
        d = asdict(self)
        d["alpha"] = self.resolved_alpha()
        return d


_KNOWN_KEYS = {f.name for f in fields(ExperimentConfig)}


def config_from_mapping(mapping):
    unknown = set(mapping) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**mapping)


def load_config(path):
    """Read a flat JSON config file; unknown keys are hard errors."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return config_from_mapping(raw)


def load_dataset(cfg):
    if cfg.dataset == "synthetic":
        return gen_synthetic(cfg.synth_config(), seed=cfg.seed)
    return parse_tudataset(
        cfg.dataset,
        name=cfg.name,
        anomaly_class=cfg.anomaly_class,
        append_node_labels=cfg.append_node_labels,
        max_degree=cfg.max_degree,
    )


# --- trial execution -----------------------------------------------------------

@dataclass
class TrialResult:
    seed: int
    val_auc: float
    test_auc: float
    model: object
    head: object
    split: SplitSpec


@dataclass
class TrialReport:
    seeds: list
    val_aucs: list
    test_aucs: list
    config: dict

    @property
    def mean_auc(self):
        return float(np.mean(self.test_aucs))

    @property
    def std_auc(self):
        return float(np.std(self.test_aucs))

    def write_csv(self, fh):
        fh.write("trial,seed,val_auc,test_auc\n")
        for t, (seed, va, ta) in enumerate(zip(self.seeds, self.val_aucs, self.test_aucs)):
            fh.write(f"{t},{seed},{va!r},{ta!r}\n")
        fh.write(f"mean,,{float(np.mean(self.val_aucs))!r},{self.mean_auc!r}\n")
        fh.write(f"std,,{float(np.std(self.val_aucs))!r},{self.std_auc!r}\n")


def run_trial(dataset, cfg, seed):
    """Split, inject, train, fit the head, and score val/test once."""
    split = split_dataset(dataset, seed)
    train_ids = inject_noise(split, cfg.beta, seed)
    train_graphs = [dataset.graphs[i] for i in train_ids]
    model, _, _ = train(train_graphs, cfg.train_config(seed))
    vectors = [agg_error_vector(g, model, tau_exp=cfg.tau_exp) for g in train_graphs]
    head = fit_score_head(
        vectors,
        hidden=cfg.head_hidden,
        steps=cfg.head_steps,
        seed=seed,
        normalizer=cfg.normalizer,
    )

    def auc_of(ids):
        graphs = [dataset.graphs[i] for i in ids]
        labels = [g.label for g in graphs]
        if len(set(labels)) < 2:
            return float("nan")
        scores, _ = score_graphs(graphs, model, head, tau_exp=cfg.tau_exp)
        return auroc(scores, labels)

    return TrialResult(
        seed=seed,
        val_auc=auc_of(split.val_ids),
        test_auc=auc_of(split.test_ids),
        model=model,
        head=head,
        split=split,
    )


def _write_score_csv(path, dataset, ids, assignment, model, head, tau_exp):
    graphs = [dataset.graphs[i] for i in ids]
    scores, vectors = score_graphs(graphs, model, head, tau_exp=tau_exp)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("graph_id,split,label,score,z_agg_0,z_agg_1,z_agg_2,z_agg_3\n")
        for gid, s, v in zip(ids, scores, vectors):
            cells = ",".join(repr(float(x)) for x in v)
            fh.write(f"{gid},{assignment[gid]},{dataset.graphs[gid].label},{s!r},{cells}\n")


def dump_embeddings(model, dataset, assignment, path):
    """CSV of mean-pooled graph embeddings: graph_id, split, label, e_0..e_{h-1}."""
    cache = _graph_cache(dataset.graphs)
    _, graph_embeddings = refresh_embeddings(model, cache)
    with open(path, "w", encoding="utf-8") as fh:
        width = graph_embeddings.shape[1]
        header = ",".join(f"e_{j}" for j in range(width))
        fh.write(f"graph_id,split,label,{header}\n")
        for gid, row in enumerate(graph_embeddings):
            cells = ",".join(repr(float(x)) for x in row)
            fh.write(f"{gid},{assignment[gid]},{dataset.graphs[gid].label},{cells}\n")
    return path


def run_experiment(cfg, out_dir=None, dataset=None):
    """Full protocol: T independent trials, aggregated into a TrialReport."""
    if dataset is None:
        dataset = load_dataset(cfg)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "config.json", "w", encoding="utf-8") as fh:
            json.dump(cfg.snapshot(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    report = TrialReport(seeds=[], val_aucs=[], test_aucs=[], config=cfg.snapshot())
    for t in range(cfg.trials):
        seed = cfg.seed + t
        result = run_trial(dataset, cfg, seed)
        report.seeds.append(seed)
        report.val_aucs.append(result.val_auc)
        report.test_aucs.append(result.test_auc)
        if out is not None:
            ids = list(result.split.val_ids) + list(result.split.test_ids)
            _write_score_csv(
                out / f"trial_{t}_scores.csv",
                dataset,
                ids,
                result.split.assignment,
                result.model,
                result.head,
                cfg.tau_exp,
            )
            if cfg.dump_embeddings:
                dump_embeddings(
                    result.model,
                    dataset,
                    result.split.assignment,
                    out / f"trial_{t}_embeddings.csv",
                )
    if out is not None:
        with open(out / "report.csv", "w", encoding="utf-8") as fh:
            report.write_csv(fh)
    return report


SWEEPABLE = {"k", "K", "beta1", "beta2", "w", "alpha", "lam_interval"}


def sweep(cfg, out_dir=None, dataset=None):
    """Cartesian product over the config's grid; one report per cell."""
    if not cfg.grid:
        raise EmptyGridError("sweep needs a non-empty grid")
    bad = set(cfg.grid) - SWEEPABLE
    if bad:
        raise ConfigError(f"grid keys not sweepable: {sorted(bad)}")
    keys = sorted(cfg.grid)
    values = [cfg.grid[k] for k in keys]
    if any(len(v) == 0 for v in values):
        raise EmptyGridError("a grid axis is empty")

    if dataset is None:
        dataset = load_dataset(cfg)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    rows = []
    for idx, combo in enumerate(itertools.product(*values)):
        overrides = dict(zip(keys, combo))
        cell_cfg = _apply_overrides(cfg, overrides)
        cell_out = out / f"cell_{idx}" if out is not None else None
        report = run_experiment(cell_cfg, out_dir=cell_out, dataset=dataset)
        rows.append((overrides, report))

    if out is not None:
        with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
            fh.write(",".join(keys) + ",mean_auc,std_auc\n")
            for overrides, report in rows:
                cells = ",".join(_cell_str(overrides[k]) for k in keys)
                fh.write(f"{cells},{report.mean_auc!r},{report.std_auc!r}\n")
    return rows


def _cell_str(v):
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(repr(float(x)) for x in v) + "]"
    return repr(v)


def _apply_overrides(cfg, overrides):
    d = asdict(cfg)
    d.pop("grid")
    for key, value in overrides.items():
        if key == "lam_interval":
            d["lam_lo"], d["lam_hi"] = float(value[0]), float(value[1])
        else:
            d[key] = value
    return ExperimentConfig(**d, grid=None)


# --- single-model train/score used by the CLI -----------------------------------

def train_and_save(dataset, cfg, out_dir):
    """Train one model on the whole dataset and checkpoint it with its head."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    graphs = list(dataset.graphs)
    model, history, _ = train(graphs, cfg.train_config(cfg.seed))
    vectors = [agg_error_vector(g, model, tau_exp=cfg.tau_exp) for g in graphs]
    head = fit_score_head(
        vectors,
        hidden=cfg.head_hidden,
        steps=cfg.head_steps,
        seed=cfg.seed,
        normalizer=cfg.normalizer,
    )
    save_checkpoint(
        out / "model.ckpt",
        model,
        extra_matrices=head.matrices(),
        meta={"normalizer": cfg.normalizer},
    )
    with open(out / "history.csv", "w", encoding="utf-8") as fh:
        history.write_csv(fh)
    return model, head, history


def load_model_and_head(path):
    model, extras, meta = load_checkpoint(path)
    head = ScoreHead.from_matrices(extras, normalizer=meta.get("normalizer", VARIANCE))
    return model, head


def score_and_dump(dataset, model, head, path, tau_exp=1.0):
    """Score every graph and write the scorer's CSV interface."""
    scores, vectors = score_graphs(dataset.graphs, model, head, tau_exp=tau_exp)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("graph_id,label,score,z_agg_0,z_agg_1,z_agg_2,z_agg_3\n")
        for gid, (s, v) in enumerate(zip(scores, vectors)):
            cells = ",".join(repr(float(x)) for x in v)
            fh.write(f"{gid},{dataset.graphs[gid].label},{s!r},{cells}\n")
    return scores
