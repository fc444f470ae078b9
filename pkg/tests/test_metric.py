from decimal import Decimal
from fractions import Fraction
import random

from hypothesis import given, settings, strategies as st
import pytest

from pseudosurgery.metric import (
    DisconnectedGraphError,
    MetricStructureError,
    induced_subspace,
    metric_from_graph,
    segment_space,
    space_from_rows,
    tree_ball,
    validate_metric,
)
from pseudosurgery.rational import approx, both, fmt, to_rational


def bellman_ford(points, edges, source):
    # independent check on the Dijkstra-based metric
    dist = {p: None for p in points}
    dist[source] = Fraction(0)
    for _ in range(len(points)):
        changed = False
        for u, v, w in edges:
            for a, b in ((u, v), (v, u)):
                if dist[a] is not None and (dist[b] is None or dist[a] + w < dist[b]):
                    dist[b] = dist[a] + w
                    changed = True
        if not changed:
            break
    return dist


@st.composite
def weighted_graphs(draw):
    n = draw(st.integers(1, 7))
    pts = [f"p{i}" for i in range(n)]
    weight = st.fractions(min_value=Fraction(1, 8), max_value=5, max_denominator=8)
    edges = [(pts[draw(st.integers(0, i - 1))], pts[i], draw(weight)) for i in range(1, n)]
    extra = draw(st.lists(st.tuples(st.sampled_from(pts), st.sampled_from(pts), weight), max_size=6))
    return pts, edges + extra


@settings(max_examples=150, deadline=None)
@given(weighted_graphs())
def test_graph_metric_matches_bellman_ford(graph):
    pts, edges = graph
    space = metric_from_graph(edges, pts)
    for p in pts:
        ref = bellman_ford(pts, edges, p)
        assert [space.d(p, q) for q in pts] == [ref[q] for q in pts]
    assert validate_metric(space).ok


@settings(max_examples=100, deadline=None)
@given(weighted_graphs(), st.integers(0, 2**32))
def test_breaking_one_entry_is_reported(graph, seed):
    pts, edges = graph
    if len(pts) < 3:
        return
    space = metric_from_graph(edges, pts)
    rows = [list(r) for r in space.rows]
    rng = random.Random(seed)
    i, j = rng.sample(range(len(pts)), 2)
    rows[i][j] = rows[j][i] = space.diameter() * 3
    report = validate_metric(rows, pts)
    if not report.ok:
        kinds = {k for k, _ in report.violations}
        assert kinds <= {"triangle"}
    for kind, (p, q, r) in report.violations:
        d = {(a, b): rows[pts.index(a)][pts.index(b)] for a in pts for b in pts}
        assert d[p, r] > d[p, q] + d[q, r]


def test_triangle_witness():
    rows = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    report = validate_metric(rows, ["a", "b", "c"])
    assert not report.ok
    assert ("triangle", ("a", "b", "c")) in report.violations


def test_each_axiom_is_named():
    rows = [[1, 2], [3, 0]]
    kinds = {k for k, _ in validate_metric(rows, ["a", "b"]).violations}
    assert kinds == {"reflexivity", "symmetry"}
    kinds = {k for k, _ in validate_metric([[0, 0], [0, 0]], ["a", "b"]).violations}
    assert kinds == {"positivity"}


def test_structural_errors():
    with pytest.raises(MetricStructureError):
        validate_metric([[0, 1]], ["a", "b"])
    with pytest.raises(MetricStructureError):
        validate_metric([[0, -1], [-1, 0]], ["a", "b"])
    with pytest.raises(ValueError):
        space_from_rows(["a", "b", "c"], [[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_disconnected_graph():
    with pytest.raises(DisconnectedGraphError):
        metric_from_graph([("a", "b", 1)], ["a", "b", "c"])


def test_loops_and_parallel_edges_do_not_matter():
    space = metric_from_graph([("a", "a", 1), ("a", "b", 3), ("a", "b", 2)], ["a", "b"])
    assert space.d("a", "b") == 2


def test_rational_parsing():
    assert to_rational("1/3") == Fraction(1, 3)
    assert to_rational("0.1") == Fraction(1, 10)
    assert to_rational(Decimal("0.25")) == Fraction(1, 4)
    assert to_rational(7) == 7
    with pytest.raises(TypeError):
        to_rational(0.1)
    with pytest.raises(TypeError):
        to_rational(True)
    with pytest.raises(ValueError):
        to_rational("1/0")
    assert fmt(Fraction(4, 2)) == "2"
    assert fmt(Fraction(-3, 6)) == "-1/2"
    assert approx(Fraction(1, 3)) == "0.333333333333"
    assert both(Fraction(15, 16)) == {"exact": "15/16", "decimal": "0.9375"}


def test_segment_space():
    s = segment_space(0, 2, Fraction(1, 2))
    assert s.points == ("0", "1/2", "1", "3/2", "2")
    assert s.d("1/2", "2") == Fraction(3, 2)
    assert len(s.graph) == 4
    with pytest.raises(ValueError):
        segment_space(0, 1, Fraction(1, 3) * 2)


def test_induced_subspace_copies_distances():
    s = metric_from_graph([("a", "b", 1), ("b", "c", 1)], ["a", "b", "c"])
    sub = induced_subspace(s, ["c", "a"])
    assert sub.points == ("a", "c")
    assert sub.d("a", "c") == 2
    with pytest.raises(KeyError):
        induced_subspace(s, ["z"])


@pytest.mark.parametrize("degree,radius,count", [(4, 1, 5), (4, 3, 53), (3, 2, 10), (5, 3, 106)])
def test_tree_ball_sizes(degree, radius, count):
    tb = tree_ball(degree, radius, subdivide=False)
    assert len(tb.vertices()) == count
    assert validate_metric(tb.space).ok


def test_cayley_words_and_midpoints():
    tb = tree_ball(4, 2, subdivide=True)
    assert tb.root == "1"
    assert {"g1", "g1^-1", "g2", "g2^-1", "g1^2", "g1g2^-1"} <= set(tb.vertices())
    m = tb.midpoint_of("1", "g1")
    assert tb.space.d("1", m) == Fraction(1, 2)
    assert tb.space.d("g1", "g2") == 2
    assert tb.orbit[("1", "g1")] == "horizontal"
    assert tb.orbit[("1", "g2")] == "vertical"
    # interior at radius 1: root, depth-1 vertices, midpoints between them
    inner = set(tb.interior())
    assert "g1^2" not in inner and m in inner
