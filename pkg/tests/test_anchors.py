import numpy as np
import pytest

from gadkit.anchors import (
    SOFTMAX_NORMALIZED,
    VERBATIM,
    AnchorBank,
    mixup_fuse,
    mixup_fuse_fixed,
    node_info_scores,
    sample_pools,
    select_topk_nodes,
)
from gadkit.autodiff import Tensor, backward, mean_all
from gadkit.errors import (
    DegeneratePoolsError,
    EmptyBankError,
    InvalidConfigError,
    NoNormalGraphsError,
)

RNG = np.random.default_rng(59)


def test_info_scores_nodes_equal_to_readout():
    z = np.repeat([[1.0, 1.0]], 3, axis=0)
    scores = node_info_scores([z], np.array([[1.0, 1.0]]))
    np.testing.assert_allclose(scores[0], 1.0)


def test_info_scores_orthogonal_node():
    nodes = np.array([[0.0, 1.0]])
    graphs = np.array([[1.0, 0.0], [2.0, 0.0]])
    scores = node_info_scores([nodes], graphs)
    np.testing.assert_allclose(scores[0], 0.0, atol=1e-12)


def test_info_scores_match_double_loop_oracle():
    nodes = [RNG.normal(size=(4, 3)), RNG.normal(size=(2, 3)), RNG.normal(size=(5, 3))]
    graphs = RNG.normal(size=(3, 3))
    scores = node_info_scores(nodes, graphs)
    for z, s in zip(nodes, scores):
        for j in range(z.shape[0]):
            total = 0.0
            for g in graphs:
                total += (z[j] @ g) / (np.linalg.norm(z[j]) * np.linalg.norm(g))
            assert s[j] == pytest.approx(total / len(graphs), abs=1e-12)


def test_info_scores_need_normal_graphs():
    with pytest.raises(NoNormalGraphsError):
        node_info_scores([], np.empty((0, 3)))


def test_topk_takes_everything_when_k_large():
    nodes = [RNG.normal(size=(3, 2)), RNG.normal(size=(2, 2))]
    scores = [np.array([0.3, 0.1, 0.5]), np.array([0.2, 0.4])]
    bank = select_topk_nodes(scores, nodes, [0, 1], k=100)
    assert bank.k == 5
    assert len(bank) == 5


def test_topk_orders_by_score():
    nodes = [np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])]
    scores = [np.array([0.9, 0.5, 0.1])]
    bank = select_topk_nodes(scores, nodes, [0], k=2)
    assert bank.sources == ((0, 0), (0, 1))
    np.testing.assert_array_equal(bank.z_topk, [[1.0, 0.0], [2.0, 0.0]])


def test_topk_tie_break_lexicographic():
    nodes = [np.ones((2, 2)), np.full((2, 2), 2.0)]
    scores = [np.array([0.5, 0.5]), np.array([0.5, 0.5])]
    bank = select_topk_nodes(scores, nodes, [0, 1], k=2)
    assert bank.sources == ((0, 0), (0, 1))


def test_mixup_identity_at_lambda_one():
    z = Tensor(RNG.normal(size=(4, 3)))
    bank = AnchorBank(z_topk=RNG.normal(size=(2, 3)), sources=((0, 0), (0, 1)), k=2)
    fused = mixup_fuse_fixed(z, bank, lam=1.0)
    np.testing.assert_array_equal(fused.data, z.data)


def test_mixup_single_anchor_at_lambda_zero():
    z = Tensor(RNG.normal(size=(5, 3)))
    anchor = RNG.normal(size=(1, 3))
    bank = AnchorBank(z_topk=anchor, sources=((0, 0),), k=1)
    fused = mixup_fuse_fixed(z, bank, lam=0.0, mode=SOFTMAX_NORMALIZED)
    np.testing.assert_allclose(fused.data, np.repeat(anchor, 5, axis=0))


def test_mixup_matches_dense_oracle():
    z = RNG.normal(size=(4, 3))
    anchors = RNG.normal(size=(2, 3))
    bank = AnchorBank(z_topk=anchors, sources=((0, 0), (0, 1)), k=2)
    fused = mixup_fuse_fixed(Tensor(z), bank, lam=0.5, mode=SOFTMAX_NORMALIZED)
    t = z @ anchors.T
    t = np.exp(t - t.max(axis=1, keepdims=True))
    t = t / t.sum(axis=1, keepdims=True)
    expected = 0.5 * z + 0.5 * (t @ anchors)
    np.testing.assert_allclose(fused.data, expected, atol=1e-12)


def test_mixup_verbatim_mode():
    z = RNG.normal(size=(3, 2))
    anchors = RNG.normal(size=(2, 2))
    bank = AnchorBank(z_topk=anchors, sources=((0, 0), (0, 1)), k=2)
    fused = mixup_fuse_fixed(Tensor(z), bank, lam=0.25, mode=VERBATIM)
    expected = 0.25 * z + 0.75 * ((z @ anchors.T) @ anchors)
    np.testing.assert_allclose(fused.data, expected, atol=1e-12)


def test_mixup_rows_stay_in_convex_hull_bound():
    z = RNG.normal(size=(6, 4))
    anchors = RNG.normal(size=(3, 4))
    bank = AnchorBank(z_topk=anchors, sources=tuple((0, i) for i in range(3)), k=3)
    fused = mixup_fuse_fixed(Tensor(z), bank, lam=0.6, mode=SOFTMAX_NORMALIZED)
    bound = max(np.linalg.norm(z, axis=1).max(), np.linalg.norm(anchors, axis=1).max())
    assert np.linalg.norm(fused.data, axis=1).max() <= bound + 1e-9


def test_mixup_gradient_only_through_queries():
    z = Tensor(RNG.normal(size=(3, 2)), requires_grad=True)
    bank = AnchorBank(z_topk=RNG.normal(size=(2, 2)), sources=((0, 0), (0, 1)), k=2)
    backward(mean_all(mixup_fuse_fixed(z, bank, lam=0.3)))
    assert z.grad is not None


def test_mixup_empty_bank():
    bank = AnchorBank(z_topk=np.empty((0, 2)), sources=(), k=0)
    with pytest.raises(EmptyBankError):
        mixup_fuse_fixed(Tensor(np.ones((2, 2))), bank, lam=0.5)


def test_mixup_interval_draw_deterministic():
    z = Tensor(RNG.normal(size=(3, 2)))
    bank = AnchorBank(z_topk=RNG.normal(size=(2, 2)), sources=((0, 0), (0, 1)), k=2)
    a = mixup_fuse(z, bank, (0.4, 0.8), np.random.default_rng(5))
    b = mixup_fuse(z, bank, (0.4, 0.8), np.random.default_rng(5))
    np.testing.assert_array_equal(a.data, b.data)


def test_sample_pools_extremes():
    eta = np.linspace(0.0, 1.0, 10)
    pools = sample_pools(eta, beta1=0.8, beta2=0.2, count=2, rng=np.random.default_rng(0))
    assert set(pools.positives) <= {8, 9}
    assert set(pools.negatives) <= {0, 1}
    assert not pools.with_replacement
    assert not (set(pools.positives) & set(pools.negatives))


def test_sample_pools_with_replacement_flag():
    eta = np.linspace(0.0, 1.0, 10)
    pools = sample_pools(eta, beta1=0.9, beta2=0.1, count=5, rng=np.random.default_rng(0))
    assert pools.with_replacement
    assert len(pools.positives) == 5


def test_sample_pools_deterministic():
    eta = RNG.normal(size=30)
    a = sample_pools(eta, 0.8, 0.2, 4, np.random.default_rng(11))
    b = sample_pools(eta, 0.8, 0.2, 4, np.random.default_rng(11))
    assert a == b


def test_sample_pools_degenerate_region():
    with pytest.raises(DegeneratePoolsError):
        sample_pools(np.full(10, 0.5), 0.9, 0.1, 2, np.random.default_rng(0))


def test_sample_pools_rejects_bad_quantiles():
    with pytest.raises(InvalidConfigError):
        sample_pools(np.linspace(0, 1, 10), beta1=0.1, beta2=0.9, count=1, rng=np.random.default_rng(0))
