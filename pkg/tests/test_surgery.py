from fractions import Fraction

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from instances import random_instances
from pseudosurgery.metric import FiniteMetricSpace, metric_from_graph, segment_space, validate_metric
from pseudosurgery.scenarios import graph_forest_collapse, interval_collapse, rose_collapse
from pseudosurgery.surgery import (
    Surgery,
    SurgeryInputError,
    SurgeryInstance,
    UnionFind,
    build_glued_space,
    induced_map,
    quotient_graph,
    surgered_metric,
)

ONE_POINT = FiniteMetricSpace(("o",), ((Fraction(0),),))


def path(n):
    return metric_from_graph([(f"p{i}", f"p{i + 1}", 1) for i in range(n - 1)],
                             [f"p{i}" for i in range(n)])


def test_identity_glue_keeps_the_metric():
    X = path(4)
    inst = SurgeryInstance(X, ["p2"], ONE_POINT, {"p2": "o"})
    s = surgered_metric(inst)
    for x in X.points:
        for y in X.points:
            assert s.dist_x(x, y) == X.d(x, y)


def test_collapsing_a_segment():
    X = path(5)
    inst = SurgeryInstance(X, ["p1", "p2", "p3"], ONE_POINT, {"p1": "o", "p2": "o", "p3": "o"})
    s = surgered_metric(inst)
    assert s.dist_x("p0", "p4") == 2
    assert s.F["p1"] == s.F["p3"] == "p1"


def test_shortcut_through_target():
    X = path(6)
    T = metric_from_graph([("a", "b", Fraction(1, 2))], ["a", "b"])
    inst = SurgeryInstance(X, ["p0", "p5"], T, {"p0": "a", "p5": "b"})
    s = surgered_metric(inst)
    assert s.dist_x("p0", "p5") == Fraction(1, 2)
    assert s.dist_x("p1", "p4") == Fraction(5, 2)


def test_classes_without_x_points():
    X = path(2)
    T = metric_from_graph([("a", "b", 3), ("b", "c", 1)], ["a", "b", "c"])
    inst = SurgeryInstance(X, ["p0"], T, {"p0": "a"})
    s = surgered_metric(inst)
    assert set(s.space.points) == {"p0", "p1", "T:b", "T:c"}
    assert s.d("p1", "T:c") == 5
    F, report = induced_map(inst, s)
    assert [r["class"] for r in report] == ["T:b", "T:c"]
    assert report[0]["distance"] == 3


def test_glued_classes_hold_one_target_point():
    for inst in random_instances(40):
        glued = build_glued_space(inst)
        for c, members in glued.class_members.items():
            assert sum(1 for tag, _ in members if tag == "T") <= 1


def test_surgered_metric_is_a_metric_and_contracts():
    for inst in random_instances(60):
        s = surgered_metric(inst)
        assert validate_metric(s.space).ok
        for x in inst.X.points:
            for y in inst.X.points:
                assert s.dist_x(x, y) <= inst.X.d(x, y)


def test_input_errors():
    X = path(3)
    with pytest.raises(SurgeryInputError):
        SurgeryInstance(X, [], ONE_POINT, {})
    with pytest.raises(SurgeryInputError):
        SurgeryInstance(X, ["zz"], ONE_POINT, {"zz": "o"})
    with pytest.raises(SurgeryInputError):
        SurgeryInstance(X, ["p0"], ONE_POINT, {"p0": "nowhere"})
    with pytest.raises(SurgeryInputError):
        SurgeryInstance(X, ["p0"], ONE_POINT, {"p0": "o", "p1": "o"})
    with pytest.raises(SurgeryInputError):
        SurgeryInstance(X, ["p0", "p0"], ONE_POINT, {"p0": "o"})


def test_union_find():
    uf = UnionFind("abcd")
    uf.union("a", "b")
    uf.union("c", "d")
    assert uf.find("a") == uf.find("b") != uf.find("c")
    uf.union("b", "d")
    assert len({uf.find(x) for x in "abcd"}) == 1


def test_interval_collapse_small():
    s = surgered_metric(interval_collapse(2, Fraction(1, 2)))
    assert [s.dist_x("0", str(2 * k)) for k in range(3)] == [0, 1, 2]
    assert s.dist_x("0", "3/2") == Fraction(1, 2)


def test_rose_smooths_to_three_loops():
    s = surgered_metric(rose_collapse(), quotient_graph=True)
    sm = s.quotient_graph.smooth()
    assert sm.nodes == ("a",)
    assert [(u, v) for u, v, _ in sm.edges] == [("a", "a")] * 3


def test_triangle_keeps_parallel_edges():
    inst = graph_forest_collapse([("x", "y", 1), ("y", "z", 1), ("x", "z", 1)], [0])
    qg = quotient_graph(inst)
    sm = qg.smooth()
    assert sm.nodes == ("x", "z")
    assert sorted(sm.edges) == [("x", "z", 1), ("x", "z", 1)]
    assert sm.path_metric().d("x", "z") == 1


def test_forest_errors():
    with pytest.raises(ValueError):
        graph_forest_collapse([("x", "y", 1)], [])
    with pytest.raises(ValueError):
        graph_forest_collapse([("x", "y", 1), ("y", "x", 1)], [0, 1])


def test_quotient_graph_needs_backing_graphs():
    X = space = path(3)
    bare = FiniteMetricSpace(space.points, space.rows)
    inst = SurgeryInstance(bare, ["p0"], ONE_POINT, {"p0": "o"})
    with pytest.raises(SurgeryInputError):
        quotient_graph(inst)
    assert quotient_graph(SurgeryInstance(X, ["p0"], ONE_POINT, {"p0": "o"})) is not None


def test_estimator_api():
    inst = interval_collapse(2)
    est = Surgery()
    assert est.get_params() == {"quotient_graph": False, "validate": True}
    with pytest.raises(NotFittedError):
        est.transform(["0"])
    est.fit(inst)
    assert est.transform(["0", "1", "4"]) == ["0", "0", "4"]
    assert est.distance("0", "4") == 2
    assert est.metric_report().ok
    rows = est.pairwise_distances(["0", "4"])
    assert rows == [[0, 2], [2, 0]]
    other = clone(est).set_params(quotient_graph=True).fit(inst)
    assert other.quotient_graph_ is not None
    with pytest.raises(TypeError):
        Surgery().fit("not an instance")


def test_segment_instances_use_the_path_graph():
    X = segment_space(0, 3, 1)
    inst = SurgeryInstance(X, ["0", "3"], ONE_POINT, {"0": "o", "3": "o"})
    s = surgered_metric(inst, quotient_graph=True)
    assert s.dist_x("1", "2") == 1
    assert s.quotient_graph.path_metric().same_as(s.space)
