"""Reader and writer for the TU flat-file graph collection format.

A dataset directory holds ``<DS>_A.txt`` (one directed edge per line as
1-based global node ids, both directions listed), ``<DS>_graph_indicator.txt``
(the 1-based graph id owning each node line), and optionally
``<DS>_graph_labels.txt``, ``<DS>_node_attributes.txt`` and
``<DS>_node_labels.txt``. Separators may be commas or whitespace.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DanglingNodeIdError,
    InconsistentCountsError,
    InvalidConfigError,
    MalformedLineError,
    MissingFileError,
)
from .graphs import Dataset, build_graph, degree_features

MINORITY = "minority"


def _tokenize(line):
    return line.replace(",", " ").split()


def _read_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [ln.strip() for ln in fh]


def _read_int_column(path):
    values = []
    for no, line in enumerate(_read_lines(path), start=1):
        if not line:
            continue
        toks = _tokenize(line)
        if len(toks) != 1:
            raise MalformedLineError(path, no, f"expected one integer, got {line!r}")
        try:
            values.append(int(float(toks[0])))
        except ValueError:
            raise MalformedLineError(path, no, f"not an integer: {toks[0]!r}") from None
    return values


def _infer_prefix(root):
    hits = sorted(root.glob("*_A.txt"))
    if not hits:
        raise MissingFileError(f"no *_A.txt under {root}")
    return hits[0].name[: -len("_A.txt")]


def parse_tudataset(root, name=None, anomaly_class=MINORITY, append_node_labels=False, max_degree=64):
    """Parse one TU-format directory into a :class:`~gadkit.graphs.Dataset`.

    ``anomaly_class`` is either ``"minority"`` (the rarer graph label maps
    to anomaly=1; on a tie the numerically larger label is taken) or an
    explicit graph-label value. Node attributes take precedence over node
    labels; one-hot node labels are appended only when
    ``append_node_labels`` is set. Datasets with neither file fall back to
    degree one-hot features clamped at ``max_degree``. Self-loop edge lines
    are ignored at ingest.
    """
    root = Path(root)
    prefix = name if name is not None else _infer_prefix(root)

    def path_of(suffix):
        return root / f"{prefix}_{suffix}.txt"

    a_path = path_of("A")
    ind_path = path_of("graph_indicator")
    for required in (a_path, ind_path):
        if not required.exists():
            raise MissingFileError(str(required))

    indicator = _read_int_column(ind_path)
    if not indicator:
        raise InconsistentCountsError(f"{ind_path} is empty")
    n_nodes = len(indicator)
    graph_ids = sorted(set(indicator))

    # map global 1-based node id -> (graph id, local 0-based index)
    local_of = {}
    sizes = {gid: 0 for gid in graph_ids}
    for global_id, gid in enumerate(indicator, start=1):
        local_of[global_id] = (gid, sizes[gid])
        sizes[gid] += 1

    edges = {gid: set() for gid in graph_ids}
    for no, line in enumerate(_read_lines(a_path), start=1):
        if not line:
            continue
        toks = _tokenize(line)
        if len(toks) != 2:
            raise MalformedLineError(a_path, no, f"expected two ids, got {line!r}")
        try:
            u, v = int(float(toks[0])), int(float(toks[1]))
        except ValueError:
            raise MalformedLineError(a_path, no, f"non-integer ids: {line!r}") from None
        if u not in local_of or v not in local_of:
            raise DanglingNodeIdError(f"{a_path}:{no}: node id {u if u not in local_of else v}")
        gu, lu = local_of[u]
        gv, lv = local_of[v]
        if gu != gv:
            raise InconsistentCountsError(
                f"{a_path}:{no}: edge crosses graphs {gu} and {gv}"
            )
        if lu == lv:
            continue  # tolerate self-loop lines; the graph model has no use for them
        edges[gu].add((lu, lv) if lu < lv else (lv, lu))

    labels_path = path_of("graph_labels")
    if labels_path.exists():
        raw_labels = _read_int_column(labels_path)
        if len(raw_labels) != len(graph_ids):
            raise InconsistentCountsError(
                f"{labels_path}: {len(raw_labels)} labels for {len(graph_ids)} graphs"
            )
    else:
        raw_labels = [0] * len(graph_ids)

    attrs_path = path_of("node_attributes")
    node_attrs = None
    if attrs_path.exists():
        rows = []
        width = None
        for no, line in enumerate(_read_lines(attrs_path), start=1):
            if not line:
                continue
            toks = _tokenize(line)
            try:
                row = [float(t) for t in toks]
            except ValueError:
                raise MalformedLineError(attrs_path, no, f"non-numeric row: {line!r}") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InconsistentCountsError(
                    f"{attrs_path}:{no}: row width {len(row)} != {width}"
                )
            rows.append(row)
        if len(rows) != n_nodes:
            raise InconsistentCountsError(
                f"{attrs_path}: {len(rows)} rows for {n_nodes} nodes"
            )
        node_attrs = np.array(rows)

    nlabels_path = path_of("node_labels")
    node_label_onehot = None
    if nlabels_path.exists():
        raw = _read_int_column(nlabels_path)
        if len(raw) != n_nodes:
            raise InconsistentCountsError(
                f"{nlabels_path}: {len(raw)} rows for {n_nodes} nodes"
            )
        values = sorted(set(raw))
        col = {v: i for i, v in enumerate(values)}
        node_label_onehot = np.zeros((n_nodes, len(values)))
        for i, v in enumerate(raw):
            node_label_onehot[i, col[v]] = 1.0

    if node_attrs is not None and node_label_onehot is not None and append_node_labels:
        node_attrs = np.hstack([node_attrs, node_label_onehot])
    elif node_attrs is None and node_label_onehot is not None:
        node_attrs = node_label_onehot

    anomaly_value = _resolve_anomaly_class(raw_labels, anomaly_class)

    rows_of = {gid: [] for gid in graph_ids}
    for i, owner in enumerate(indicator):
        rows_of[owner].append(i)

    graphs = []
    for gid, raw in zip(graph_ids, raw_labels):
        n = sizes[gid]
        if node_attrs is not None:
            attrs = node_attrs[rows_of[gid]]
        else:
            attrs = np.ones((n, 1))
        g = build_graph(n, sorted(edges[gid]), attrs, int(raw == anomaly_value))
        if node_attrs is None:
            g = degree_features(g, max_deg=max_degree)
        graphs.append(g)
    return Dataset.from_graphs(graphs, name=prefix)


def _resolve_anomaly_class(raw_labels, policy):
    if policy != MINORITY:
        return int(policy)
    counts = {}
    for v in raw_labels:
        counts[v] = counts.get(v, 0) + 1
    # rarest label is the anomaly; ties go to the larger label value
    return min(counts, key=lambda v: (counts[v], -v))


@dataclass(frozen=True)
class ValidationReport:
    n_graphs: int
    attr_dim: int
    class_counts: tuple
    mean_nodes: tuple
    mean_edges: tuple
    nan_graphs: tuple
    empty_graphs: tuple

    def __str__(self):
        lines = [
            f"graphs: {self.n_graphs}",
            f"attr_dim: {self.attr_dim}",
            f"class_counts (normal, anomalous): {self.class_counts}",
            f"mean nodes (normal, anomalous): {self.mean_nodes}",
            f"mean edges (normal, anomalous): {self.mean_edges}",
            f"graphs with NaN attrs: {list(self.nan_graphs)}",
            f"graphs without edges: {list(self.empty_graphs)}",
        ]
        return "\n".join(lines)


def validate_dataset(dataset):
    """Summarize a dataset and flag NaN attributes and edgeless graphs."""

    def class_mean(label, fn):
        vals = [fn(g) for g in dataset.graphs if g.label == label]
        return float(np.mean(vals)) if vals else float("nan")

    nan_graphs = tuple(
        i for i, g in enumerate(dataset.graphs) if np.isnan(g.attrs).any()
    )
    empty_graphs = tuple(i for i, g in enumerate(dataset.graphs) if not g.edges)
    return ValidationReport(
        n_graphs=len(dataset),
        attr_dim=dataset.attr_dim,
        class_counts=dataset.class_counts,
        mean_nodes=(class_mean(0, lambda g: g.n), class_mean(1, lambda g: g.n)),
        mean_edges=(
            class_mean(0, lambda g: g.num_edges()),
            class_mean(1, lambda g: g.num_edges()),
        ),
        nan_graphs=nan_graphs,
        empty_graphs=empty_graphs,
    )


def write_tudataset(dataset, outdir, name=None):
    """Write a dataset back out in TU format (both edge directions listed)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    prefix = name if name is not None else dataset.name
    if not prefix:
        raise InvalidConfigError("dataset name required for TU export")

    a_lines = []
    ind_lines = []
    label_lines = []
    attr_lines = []
    offset = 0
    for gid, g in enumerate(dataset.graphs, start=1):
        for u, v in g.edges:
            a_lines.append(f"{offset + u + 1}, {offset + v + 1}")
            a_lines.append(f"{offset + v + 1}, {offset + u + 1}")
        ind_lines.extend([str(gid)] * g.n)
        label_lines.append(str(g.label))
        for row in g.attrs:
            attr_lines.append(", ".join(repr(float(x)) for x in row))
        offset += g.n

    (outdir / f"{prefix}_A.txt").write_text("\n".join(a_lines) + "\n")
    (outdir / f"{prefix}_graph_indicator.txt").write_text("\n".join(ind_lines) + "\n")
    (outdir / f"{prefix}_graph_labels.txt").write_text("\n".join(label_lines) + "\n")
    (outdir / f"{prefix}_node_attributes.txt").write_text("\n".join(attr_lines) + "\n")
    return outdir
