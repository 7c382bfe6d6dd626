import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gadkit.errors import (
    ConfigError,
    EmptyGridError,
    PoolExhaustedError,
    SingleClassDatasetError,
    SingleClassLabelsError,
)
from gadkit.experiment import (
    ExperimentConfig,
    TRAIN,
    auroc,
    config_from_mapping,
    inject_noise,
    load_config,
    load_dataset,
    run_experiment,
    split_dataset,
    sweep,
)
from gadkit.graphs import SynthConfig, build_graph, Dataset, gen_synthetic

RNG = np.random.default_rng(23)


def toy_dataset(normals=100, anomalies=20):
    graphs = []
    for i in range(normals + anomalies):
        label = int(i >= normals)
        graphs.append(build_graph(2, [(0, 1)], RNG.normal(size=(2, 2)), label))
    return Dataset.from_graphs(graphs, name="toy")


def fast_config(**overrides):
    base = dict(
        dataset="synthetic",
        synth_n_graphs=40,
        synth_nodes_lo=5,
        synth_nodes_hi=8,
        synth_anom_frac=0.25,
        synth_attr_dim=3,
        epochs=2,
        trials=1,
        w=1.0,
        k=16,
        K=2,
        hidden_dim=8,
        head_steps=20,
        seed=0,
    )
    base.update(overrides)
    return config_from_mapping(base)


# --- splits ---------------------------------------------------------------

def test_split_counts_follow_protocol():
    split = split_dataset(toy_dataset(100, 20), seed=0)
    assert len(split.train_ids) == 80
    assert len(split.val_ids) == 10 + 1
    assert len(split.test_ids) == 10 + 1
    assert len(split.pool_ids) == 18


def test_split_deterministic_and_seed_sensitive():
    d = toy_dataset()
    a = split_dataset(d, seed=3)
    b = split_dataset(d, seed=3)
    c = split_dataset(d, seed=4)
    assert a == b
    assert a.assignment != c.assignment
    assert len(a.train_ids) == len(c.train_ids)


def test_split_requires_both_classes():
    graphs = [build_graph(1, [], np.zeros((1, 1)), 0) for _ in range(5)]
    with pytest.raises(SingleClassDatasetError):
        split_dataset(Dataset.from_graphs(graphs, "one"), seed=0)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=12, max_value=200),
    st.integers(min_value=2, max_value=60),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_split_invariants_property(normals, anomalies, seed):
    split = split_dataset(toy_dataset(normals, anomalies), seed=seed)
    n_train = len(split.train_ids)
    n_val_norm = sum(
        1 for i in split.val_ids if split.assignment[i] == "val" and i < normals
    )
    # no overlap anywhere
    all_ids = list(split.train_ids) + list(split.val_ids) + list(split.test_ids) + list(split.pool_ids)
    assert len(all_ids) == len(set(all_ids))
    # 80/10/10 within rounding
    assert abs(n_train - 0.8 * normals) <= 1.0
    assert abs(n_val_norm - 0.1 * normals) <= 1.0
    # anomaly shares
    a_val = sum(1 for i in split.val_ids if i >= normals)
    a_test = sum(1 for i in split.test_ids if i >= normals)
    assert abs(a_val - 0.05 * anomalies) <= 1.0
    assert abs(a_test - 0.05 * anomalies) <= 1.0


# --- injection --------------------------------------------------------------

def test_inject_zero_beta_is_identity():
    split = split_dataset(toy_dataset(), seed=0)
    assert inject_noise(split, 0.0, seed=0) == list(split.train_ids)


def test_inject_count_rounds():
    split = split_dataset(toy_dataset(100, 40), seed=1)
    assert len(split.train_ids) == 80
    train = inject_noise(split, 0.3, seed=1)
    assert len(train) == 80 + 24


def test_injected_ids_disjoint_from_eval_splits():
    split = split_dataset(toy_dataset(100, 40), seed=2)
    train = inject_noise(split, 0.2, seed=2)
    eval_ids = set(split.val_ids) | set(split.test_ids)
    assert not (set(train) & eval_ids)


def test_inject_pool_exhausted():
    split = split_dataset(toy_dataset(100, 10), seed=0)
    with pytest.raises(PoolExhaustedError):
        inject_noise(split, 0.5, seed=0)


# --- auroc --------------------------------------------------------------------

def test_auroc_perfect_separation():
    scores = np.array([0.1, 0.2, 0.3, 0.9, 1.1])
    labels = np.array([0, 0, 0, 1, 1])
    assert auroc(scores, labels) == 1.0


def test_auroc_all_ties_is_half():
    assert auroc(np.ones(6), np.array([0, 0, 0, 1, 1, 1])) == 0.5


def test_auroc_single_class_rejected():
    with pytest.raises(SingleClassLabelsError):
        auroc(np.arange(4.0), np.zeros(4, dtype=int))


def brute_force_auroc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else (0.5 if p == n else 0.0)
    return total / (len(pos) * len(neg))


def test_auroc_matches_pairwise_oracle():
    for _ in range(200):
        n = int(RNG.integers(5, 40))
        scores = np.round(RNG.normal(size=n), 1)  # rounding forces ties
        labels = RNG.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        assert auroc(scores, labels) == pytest.approx(
            brute_force_auroc(scores, labels), abs=1e-12
        )


def test_auroc_negation_symmetry():
    scores = RNG.permutation(np.arange(30.0))  # tie free
    labels = RNG.integers(0, 2, size=30)
    labels[:2] = [0, 1]
    assert auroc(scores, labels) == pytest.approx(1.0 - auroc(-scores, labels))


# --- config -----------------------------------------------------------------

def test_config_unknown_key_rejected():
    with pytest.raises(ConfigError):
        config_from_mapping({"epochz": 10})


def test_config_alpha_resolution():
    assert ExperimentConfig(beta=0.0).resolved_alpha() == 0.15
    assert ExperimentConfig(beta=0.3).resolved_alpha() == 0.3
    assert ExperimentConfig(beta=0.3, alpha=0.1).resolved_alpha() == 0.1


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"epochs": 7, "beta": 0.2}))
    cfg = load_config(path)
    assert cfg.epochs == 7
    assert cfg.beta == 0.2
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_load_config_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(path)


# --- experiments ---------------------------------------------------------------

def test_run_experiment_bitwise_reproducible(tmp_path):
    cfg = fast_config(trials=1)
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_experiment(cfg, out_dir=a)
    run_experiment(cfg, out_dir=b)
    for name in ("report.csv", "trial_0_scores.csv", "config.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_experiment_report_layout(tmp_path):
    cfg = fast_config(trials=2)
    report = run_experiment(cfg, out_dir=tmp_path / "out")
    assert len(report.test_aucs) == 2
    lines = (tmp_path / "out" / "report.csv").read_text().splitlines()
    assert lines[0] == "trial,seed,val_auc,test_auc"
    assert len(lines) == 1 + 2 + 2  # header, trials, mean, std
    assert lines[-2].startswith("mean,")
    assert lines[-1].startswith("std,")


def test_run_experiment_embedding_dump(tmp_path):
    cfg = fast_config(trials=1, dump_embeddings=True)
    run_experiment(cfg, out_dir=tmp_path / "out")
    lines = (tmp_path / "out" / "trial_0_embeddings.csv").read_text().splitlines()
    dataset_size = cfg.synth_n_graphs
    assert len(lines) == dataset_size + 1
    assert len(lines[0].split(",")) == cfg.hidden_dim + 3


def test_sweep_single_point_matches_run(tmp_path):
    cfg = fast_config(grid={"w": [1.0]})
    rows = sweep(cfg, out_dir=tmp_path / "s")
    plain = run_experiment(fast_config(w=1.0), out_dir=tmp_path / "r")
    assert len(rows) == 1
    assert rows[0][1].test_aucs == plain.test_aucs


def test_sweep_grid_size(tmp_path):
    cfg = fast_config(grid={"w": [0.5, 1.0], "K": [2, 3]})
    rows = sweep(cfg, out_dir=tmp_path / "s")
    assert len(rows) == 4
    lines = (tmp_path / "s" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "K,w,mean_auc,std_auc"
    assert len(lines) == 5


def test_sweep_rejects_empty_grid():
    with pytest.raises(EmptyGridError):
        sweep(fast_config())
    with pytest.raises(EmptyGridError):
        sweep(fast_config(grid={"w": []}))
    with pytest.raises(ConfigError):
        sweep(fast_config(grid={"epochs": [1, 2]}))


def test_load_dataset_synthetic_uses_master_seed():
    cfg = fast_config(seed=9)
    a = load_dataset(cfg)
    b = load_dataset(cfg)
    for ga, gb in zip(a.graphs, b.graphs):
        assert ga.edges == gb.edges
