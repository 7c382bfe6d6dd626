import numpy as np
import pytest

from gadkit.errors import (
    DanglingNodeIdError,
    InconsistentCountsError,
    MalformedLineError,
    MissingFileError,
)
from gadkit.graphs import SynthConfig, build_graph, Dataset, gen_synthetic
from gadkit.tudata import parse_tudataset, validate_dataset, write_tudataset


def write_fixture(root, prefix="TOY", **overrides):
    """Two graphs: graph 1 = nodes {1,2} with edge (1,2); graph 2 = node {3}."""
    files = {
        "A": "1, 2\n2, 1\n",
        "graph_indicator": "1\n1\n2\n",
        "graph_labels": "0\n1\n",
        "node_attributes": "1.0, 0.5\n-1.0, 0.25\n0.0, 0.0\n",
    }
    files.update(overrides)
    for suffix, content in files.items():
        if content is None:
            continue
        (root / f"{prefix}_{suffix}.txt").write_text(content)
    return root


def test_parse_two_graph_fixture(tmp_path):
    write_fixture(tmp_path)
    d = parse_tudataset(tmp_path)
    assert len(d) == 2
    g0, g1 = d.graphs
    assert (g0.n, g0.edges) == (2, ((0, 1),))
    assert (g1.n, g1.edges) == (1, ())
    np.testing.assert_array_equal(g0.attrs, [[1.0, 0.5], [-1.0, 0.25]])
    # minority policy: label 1 appears once -> anomaly
    assert (g0.label, g1.label) == (0, 1)


def test_parse_missing_edge_file(tmp_path):
    write_fixture(tmp_path, A=None)
    with pytest.raises(MissingFileError):
        parse_tudataset(tmp_path)


def test_parse_whitespace_separators(tmp_path):
    write_fixture(tmp_path, A="1 2\n2 1\n", node_attributes="1 0.5\n-1 0.25\n0 0\n")
    d = parse_tudataset(tmp_path)
    assert d.graphs[0].edges == ((0, 1),)


def test_parse_malformed_edge_line_reports_position(tmp_path):
    write_fixture(tmp_path, A="1, 2\nnope\n")
    with pytest.raises(MalformedLineError) as err:
        parse_tudataset(tmp_path)
    assert err.value.line_no == 2


def test_parse_dangling_node_id(tmp_path):
    write_fixture(tmp_path, A="1, 9\n")
    with pytest.raises(DanglingNodeIdError):
        parse_tudataset(tmp_path)


def test_parse_cross_graph_edge(tmp_path):
    write_fixture(tmp_path, A="1, 3\n")
    with pytest.raises(InconsistentCountsError):
        parse_tudataset(tmp_path)


def test_parse_label_count_mismatch(tmp_path):
    write_fixture(tmp_path, graph_labels="0\n")
    with pytest.raises(InconsistentCountsError):
        parse_tudataset(tmp_path)


def test_parse_attr_row_count_mismatch(tmp_path):
    write_fixture(tmp_path, node_attributes="1, 2\n3, 4\n")
    with pytest.raises(InconsistentCountsError):
        parse_tudataset(tmp_path)


def test_explicit_anomaly_class(tmp_path):
    write_fixture(tmp_path, graph_labels="0\n1\n")
    d = parse_tudataset(tmp_path, anomaly_class=0)
    assert [g.label for g in d.graphs] == [1, 0]


def test_node_labels_one_hot_when_no_attributes(tmp_path):
    write_fixture(tmp_path, node_attributes=None, node_labels="7\n9\n7\n")
    d = parse_tudataset(tmp_path)
    np.testing.assert_array_equal(d.graphs[0].attrs, [[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(d.graphs[1].attrs, [[1.0, 0.0]])


def test_node_labels_appended_only_on_request(tmp_path):
    write_fixture(tmp_path, node_labels="7\n9\n7\n")
    plain = parse_tudataset(tmp_path)
    assert plain.attr_dim == 2
    appended = parse_tudataset(tmp_path, append_node_labels=True)
    assert appended.attr_dim == 4


def test_degree_features_fallback(tmp_path):
    write_fixture(tmp_path, node_attributes=None)
    d = parse_tudataset(tmp_path, max_degree=3)
    assert d.attr_dim == 4
    np.testing.assert_array_equal(d.graphs[0].attrs[:, 1], [1.0, 1.0])


def test_self_loop_lines_ignored(tmp_path):
    write_fixture(tmp_path, A="1, 2\n2, 1\n1, 1\n")
    d = parse_tudataset(tmp_path)
    assert d.graphs[0].edges == ((0, 1),)


def test_directed_line_count_invariant(tmp_path):
    d = gen_synthetic(SynthConfig(n_graphs=12), seed=3)
    out = write_tudataset(d, tmp_path / "synth", name="SYN")
    lines = [ln for ln in (out / "SYN_A.txt").read_text().splitlines() if ln]
    total_undirected = sum(g.num_edges() for g in d.graphs)
    assert len(lines) == 2 * total_undirected
    nodes = [ln for ln in (out / "SYN_graph_indicator.txt").read_text().splitlines() if ln]
    assert len(nodes) == sum(g.n for g in d.graphs)


def test_round_trip_through_tu_format(tmp_path):
    d = gen_synthetic(SynthConfig(n_graphs=10, attr_dim=3), seed=11)
    out = write_tudataset(d, tmp_path / "rt", name="RT")
    back = parse_tudataset(out)
    assert len(back) == len(d)
    assert back.class_counts == d.class_counts
    for a, b in zip(d.graphs, back.graphs):
        assert a.edges == b.edges
        np.testing.assert_array_equal(a.attrs, b.attrs)
        assert a.label == b.label


def test_validate_dataset_flags_planted_nan():
    g0 = build_graph(2, [(0, 1)], np.zeros((2, 2)), 0)
    attrs = np.zeros((2, 2))
    attrs[1, 0] = np.nan
    g1 = Graph_with_nan(attrs)
    d = Dataset.from_graphs([g0, g1], name="nan")
    report = validate_dataset(d)
    assert report.nan_graphs == (1,)
    assert report.n_graphs == 2


def Graph_with_nan(attrs):
    # bypass build_graph's finiteness check to plant the defect
    from gadkit.graphs import Graph

    frozen = attrs.copy()
    frozen.flags.writeable = False
    return Graph(n=2, edges=((0, 1),), attrs=frozen, label=1)


def test_validate_dataset_reports_means():
    g0 = build_graph(3, [(0, 1), (1, 2)], np.zeros((3, 1)), 0)
    g1 = build_graph(1, [], np.zeros((1, 1)), 1)
    report = validate_dataset(Dataset.from_graphs([g0, g1], name="m"))
    assert report.mean_nodes == (3.0, 1.0)
    assert report.mean_edges == (2.0, 0.0)
    assert report.empty_graphs == (1,)
