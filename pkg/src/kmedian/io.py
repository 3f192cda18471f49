"""Instance file round-tripping.

Format (JSON, UTF-8)::

    { "points": [{"id": 0, "weight": 1.0, "label": "mu"}, ...],
      "metric": {"type": "dense", "matrix": [[0, 1, ...], ...]}
              | {"type": "graph", "edges": [[u, v, length], ...]}
              | {"type": "tree_lb", "h": 3},
      "pseudometric": true|false,
      "tie_priority": [ids, highest removal priority first],   # optional
      "meta": {...} }                                          # optional

Dense matrices must be square, symmetric, zero-diagonal, and nonnegative;
violations are rejected at load time with a field diagnostic.  A ``tree_lb``
metric regenerates the layered-tree instance and cross-checks the stored
points against it, so the implicit form and an expanded ``graph`` form load
to identical spaces.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InstanceFormatError
from .generators import gen_tree_lb, tree_lb_edges
from .space import DenseOracle, WeightedMetricSpace, graph_to_metric
from .validation import check_square_distance_matrix


def _parse_points(data):
    points = data.get("points")
    if not isinstance(points, list) or not points:
        raise InstanceFormatError("points: expected a nonempty list")
    n = len(points)
    weights = np.ones(n)
    labels = [None] * n
    seen = set()
    for idx, p in enumerate(points):
        if not isinstance(p, dict) or "id" not in p:
            raise InstanceFormatError(f"points[{idx}]: expected an object with an id")
        pid = p["id"]
        if not isinstance(pid, int) or not 0 <= pid < n or pid in seen:
            raise InstanceFormatError(
                f"points[{idx}].id: ids must be distinct integers covering 0..{n - 1}")
        seen.add(pid)
        wgt = p.get("weight", 1.0)
        if not isinstance(wgt, (int, float)) or wgt < 0 or not np.isfinite(wgt):
            raise InstanceFormatError(f"points[{idx}].weight: invalid value {wgt!r}")
        weights[pid] = float(wgt)
        lab = p.get("label")
        if lab is not None and not isinstance(lab, str):
            raise InstanceFormatError(f"points[{idx}].label: expected a string")
        labels[pid] = lab
    return n, weights, labels


def loads_instance(data: dict) -> WeightedMetricSpace:
    if not isinstance(data, dict):
        raise InstanceFormatError("top level: expected a JSON object")
    n, weights, labels = _parse_points(data)
    metric = data.get("metric")
    if not isinstance(metric, dict) or "type" not in metric:
        raise InstanceFormatError("metric: expected an object with a type")
    pseudometric = data.get("pseudometric", False)
    if not isinstance(pseudometric, bool):
        raise InstanceFormatError("pseudometric: expected true or false")
    tie_priority = data.get("tie_priority")
    if tie_priority is not None:
        if (not isinstance(tie_priority, list)
                or any(not isinstance(p, int) for p in tie_priority)):
            raise InstanceFormatError("tie_priority: expected a list of point ids")

    mtype = metric["type"]
    if mtype == "dense":
        try:
            matrix = check_square_distance_matrix(metric.get("matrix"), "metric.matrix")
        except (ValueError, TypeError) as exc:
            raise InstanceFormatError(str(exc)) from exc
        if matrix.shape[0] != n:
            raise InstanceFormatError(
                f"metric.matrix: {matrix.shape[0]} rows for {n} points")
        space = WeightedMetricSpace(
            DenseOracle(matrix), weights, labels, pseudometric=pseudometric,
            tie_priority=tie_priority, source={"type": "dense"})
    elif mtype == "graph":
        edges = metric.get("edges")
        if not isinstance(edges, list):
            raise InstanceFormatError("metric.edges: expected a list")
        for i, e in enumerate(edges):
            if not (isinstance(e, list) and len(e) == 3):
                raise InstanceFormatError(f"metric.edges[{i}]: expected [u, v, length]")
        space = graph_to_metric(edges, n=n, weights=weights, labels=labels,
                                pseudometric=pseudometric, tie_priority=tie_priority)
    elif mtype == "tree_lb":
        h = metric.get("h")
        if not isinstance(h, int):
            raise InstanceFormatError("metric.h: expected an integer")
        space = gen_tree_lb(h)
        if space.n_points != n:
            raise InstanceFormatError(
                f"points: tree_lb h={h} has {space.n_points} points, file lists {n}")
        if not np.array_equal(space.weights, weights):
            i = int(np.flatnonzero(space.weights != weights)[0])
            raise InstanceFormatError(
                f"points[{i}].weight: {weights[i]!r} does not match the tree_lb "
                f"construction value {space.weights[i]!r}")
        if tie_priority is not None and tuple(tie_priority) != space.tie_priority:
            space = WeightedMetricSpace(
                space._oracle, weights, labels, pseudometric=pseudometric,
                tie_priority=tie_priority, source={"type": "tree_lb", "h": h})
    else:
        raise InstanceFormatError(f"metric.type: unknown type {mtype!r}")
    if isinstance(data.get("meta"), dict):
        space.meta = data["meta"]
    return space


def load_instance(path) -> WeightedMetricSpace:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: invalid JSON at line {exc.lineno}, "
                                  f"column {exc.colno}") from exc
    except OSError as exc:
        raise InstanceFormatError(f"{path}: {exc.strerror}") from exc
    return loads_instance(data)


def dumps_instance(space: WeightedMetricSpace, expand_graph: bool = False) -> dict:
    points = []
    for i in range(space.n_points):
        p = {"id": i, "weight": float(space.weights[i])}
        if space.labels is not None and space.labels[i] is not None:
            p["label"] = space.labels[i]
        points.append(p)
    source = space.source or {"type": "dense"}
    if source["type"] == "tree_lb":
        if expand_graph:
            metric = {"type": "graph",
                      "edges": [[u, v, w] for u, v, w in tree_lb_edges(source["h"])]}
        else:
            metric = {"type": "tree_lb", "h": source["h"]}
    elif source["type"] == "graph":
        metric = {"type": "graph", "edges": source["edges"]}
    else:
        metric = {"type": "dense", "matrix": space.matrix().tolist()}
    data = {"points": points, "metric": metric, "pseudometric": space.pseudometric}
    if space.tie_priority is not None:
        data["tie_priority"] = list(space.tie_priority)
    meta = getattr(space, "meta", None)
    if meta:
        data["meta"] = meta
    return data


def save_instance(space: WeightedMetricSpace, path, expand_graph: bool = False):
    data = dumps_instance(space, expand_graph=expand_graph)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(data, fh, separators=(",", ":"))
        fh.write("\n")
