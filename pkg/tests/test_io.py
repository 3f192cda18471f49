import json

import numpy as np
import pytest

from kmedian import (InstanceFormatError, gen_random, gen_star, gen_tree_lb,
                     load_instance, save_instance)
from kmedian.io import dumps_instance, loads_instance


def _roundtrip(space, tmp_path, name="inst.json", **kwargs):
    path = tmp_path / name
    save_instance(space, path, **kwargs)
    return load_instance(path)


def test_roundtrip_dense(tmp_path):
    space = gen_random(9, "unit_square_points", 4)
    back = _roundtrip(space, tmp_path)
    assert np.array_equal(back.matrix(), space.matrix())
    assert np.array_equal(back.weights, space.weights)


def test_roundtrip_graph(tmp_path):
    space = gen_star(3, 5)
    back = _roundtrip(space, tmp_path)
    assert np.array_equal(back.matrix(), space.matrix())
    assert back.labels == space.labels


def test_roundtrip_tree_implicit_and_expanded(tmp_path):
    t = gen_tree_lb(2)
    implicit = _roundtrip(t, tmp_path, "imp.json")
    expanded = _roundtrip(t, tmp_path, "exp.json", expand_graph=True)
    assert np.array_equal(implicit.matrix(), expanded.matrix())
    assert implicit.tie_priority == expanded.tie_priority == t.tie_priority
    imp_data = json.loads((tmp_path / "imp.json").read_text())
    exp_data = json.loads((tmp_path / "exp.json").read_text())
    assert imp_data["metric"]["type"] == "tree_lb"
    assert exp_data["metric"]["type"] == "graph"


def test_tree_meta_records_cluster_collapse(tmp_path):
    t = gen_tree_lb(1)
    path = tmp_path / "t.json"
    save_instance(t, path)
    data = json.loads(path.read_text())
    assert data["meta"]["clusters_collapsed_to_weights"] is True


def test_save_is_deterministic(tmp_path):
    space = gen_random(7, "random_graph", 12)
    save_instance(space, tmp_path / "a.json")
    save_instance(space, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_load_rejects_asymmetric_matrix():
    data = {"points": [{"id": 0, "weight": 1.0}, {"id": 1, "weight": 1.0}],
            "metric": {"type": "dense", "matrix": [[0.0, 1.0], [2.0, 0.0]]},
            "pseudometric": False}
    with pytest.raises(InstanceFormatError, match=r"metric.matrix\[0\]\[1\]"):
        loads_instance(data)


def test_load_rejects_nonzero_diagonal():
    data = {"points": [{"id": 0}], "metric": {"type": "dense", "matrix": [[1.0]]}}
    with pytest.raises(InstanceFormatError, match=r"metric.matrix\[0\]\[0\]"):
        loads_instance(data)


def test_load_rejects_nonsquare():
    data = {"points": [{"id": 0}, {"id": 1}],
            "metric": {"type": "dense", "matrix": [[0.0, 1.0]]}}
    with pytest.raises(InstanceFormatError, match="square"):
        loads_instance(data)


def test_load_rejects_bad_ids():
    data = {"points": [{"id": 0}, {"id": 2}],
            "metric": {"type": "dense", "matrix": [[0.0, 1.0], [1.0, 0.0]]}}
    with pytest.raises(InstanceFormatError, match=r"points\[1\].id"):
        loads_instance(data)


def test_load_rejects_negative_weight():
    data = {"points": [{"id": 0, "weight": -1.0}],
            "metric": {"type": "dense", "matrix": [[0.0]]}}
    with pytest.raises(InstanceFormatError, match=r"points\[0\].weight"):
        loads_instance(data)


def test_load_rejects_tree_weight_mismatch():
    t = gen_tree_lb(1)
    data = dumps_instance(t)
    data["points"][1]["weight"] = 5.0
    with pytest.raises(InstanceFormatError, match="tree_lb"):
        loads_instance(data)


def test_load_rejects_unknown_metric_type():
    data = {"points": [{"id": 0}], "metric": {"type": "sparse"}}
    with pytest.raises(InstanceFormatError, match="sparse"):
        loads_instance(data)


def test_load_invalid_json_names_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"points": [\n  broken')
    with pytest.raises(InstanceFormatError, match="line 2"):
        load_instance(path)


def test_zero_length_edges_allowed_in_pseudometric(tmp_path):
    data = {"points": [{"id": 0}, {"id": 1}, {"id": 2}],
            "metric": {"type": "graph",
                       "edges": [[0, 1, 0.0], [1, 2, 1.0]]},
            "pseudometric": True}
    space = loads_instance(data)
    assert space.distance(0, 1) == 0.0
    assert space.distance(0, 2) == 1.0
    assert space.pseudometric
