"""Ready-made surgery instances: the interval collapse of the real line, the
degree-4 tree collapse, partial folds of regular trees, collapsing a forest
in a finite graph, and the ray whose gluing map is only a quasi-isometry."""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .metric import (
    FiniteMetricSpace,
    coordinate,
    induced_subspace,
    metric_from_graph,
    point_id,
    segment_space,
    tree_ball,
)
from .rational import fmt, to_rational
from .surgery import SurgeryInstance, UnionFind, surgered_metric


def _params(**kw):
    return {k: (fmt(v) if isinstance(v, Fraction) else v) for k, v in kw.items()}


def interval_collapse(n, resolution=Fraction(1, 2)):
    """Collapse each of [0,1], [2,3], ..., [2n, 2n+1] to a point of Z."""
    h = to_rational(resolution)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if h <= 0 or (1 / h).denominator != 1:
        raise ValueError(f"resolution {h} does not divide 1")
    X = segment_space(0, 2 * n + 1, h)
    S = [p for p in X.points if int(coordinate(p)) % 2 == 0 or coordinate(p) % 2 == 1]
    T = segment_space(0, n, 1) if n > 0 else FiniteMetricSpace(("0",), ((Fraction(0),),))
    f = {s: point_id(int(coordinate(s) // 2)) for s in S}
    meta = {"scenario": "interval-collapse", "params": _params(n=n, resolution=h)}
    return SurgeryInstance(X, S, T, f, meta)


def _terminal_power(word, gen):
    if word and word[-1][0] == gen:
        return word[-1][1]
    return 0


def tree_collapse(radius=3):
    """Collapse every other horizontal edge of the degree-4 tree to its midpoint.

    The edge (w, w·g1) is collapsed when the terminal syllable of w is an
    even power of g1 (power 0 included).
    """
    if radius < 2:
        raise ValueError("radius must be at least 2")
    tb = tree_ball(4, radius, subdivide=True)
    S, mids, f = [], [], {}
    for (a, b), label in tb.orbit.items():
        if label != "horizontal" or _terminal_power(tb.words[a], "g1") % 2:
            continue
        m = tb.midpoint_of(a, b)
        for p in (a, m, b):
            f[p] = m
        mids.append(m)
    order = tb.space.index
    S = sorted(f, key=order.__getitem__)
    T = induced_subspace(tb.space, mids)
    interior = set(tb.interior())
    meta = {
        "scenario": "tree-collapse",
        "params": _params(radius=radius),
        "root": tb.root,
        "interior": interior,
        "interior_radius": fmt(radius - 1),
        "subdivision": set(tb.midpoints),
        "tree": tb,
    }
    return SurgeryInstance(tb.space, S, T, f, meta)


# -- partial folds ----------------------------------------------------------


def _bfs_children(space, root):
    adj = {p: [] for p in space.points}
    for u, v, _ in space.graph:
        if u != v:
            adj[u].append(v)
            adj[v].append(u)
    rank = space.index
    parent = {root: None}
    children = {}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        children[u] = []
        for v in sorted(set(adj[u]), key=rank.__getitem__):
            if v not in parent:
                parent[v] = u
                children[u].append(v)
                queue.append(v)
    return parent, children


def fold_instance(space, root, subdivision, interior, meta=None):
    """One partial fold of a subdivided tree given as a graph-backed space.

    At each interior branch vertex of degree above three, the first two
    child half-edges that end at subdivision points form a half-corner
    {v, m1, m2}; f fixes v and m1 and sends m2 to m1. Only child half-edges
    are used, so no subdivision point lies in two half-corners.
    """
    parent, children = _bfs_children(space, root)
    degree = {p: 0 for p in space.points}
    for u, v, _ in space.graph:
        degree[u] += 1
        degree[v] += 1
    S, f, tpts, excluded = [], {}, [], []
    for v in space.points:
        if v in subdivision or v not in interior or degree[v] <= 3:
            continue
        plain = [c for c in children.get(v, []) if c in subdivision and degree[c] == 2]
        if len(plain) < 2:
            excluded.append(v)
            continue
        m1, m2 = plain[0], plain[1]
        f[v], f[m1], f[m2] = v, m1, m1
        tpts.extend([v, m1])
    if not f:
        raise ValueError("no vertex is eligible for a partial fold")
    S = sorted(f, key=space.index.__getitem__)
    T = induced_subspace(space, tpts)
    info = dict(meta or {})
    info.update({
        "root": root,
        "interior": set(interior),
        "subdivision": set(subdivision),
        "excluded": excluded,
    })
    return SurgeryInstance(space, S, T, f, info)


def partial_fold(degree=5, radius=3):
    if degree < 4:
        raise ValueError("degree must be at least 4")
    if radius < 2:
        raise ValueError("radius must be at least 2")
    tb = tree_ball(degree, radius, subdivide=True)
    boundary = [v for v in tb.vertices() if v not in set(tb.interior())]
    meta = {
        "scenario": "partial-fold",
        "params": _params(degree=degree, radius=radius),
        "interior_radius": fmt(radius - 1),
        "boundary": boundary,
        "tree": tb,
    }
    return fold_instance(tb.space, tb.root, set(tb.midpoints), set(tb.interior()), meta)


@dataclass
class FoldStep:
    instance: SurgeryInstance
    surgered: object
    spectrum: list
    multiset: dict = field(default_factory=dict)


def iterate_partial_fold(degree=5, radius=3, steps=None):
    """Fold repeatedly, re-deriving S and T on each quotient graph, until
    every interior branch vertex has degree three (or ``steps`` run out)."""
    inst = partial_fold(degree, radius)
    out = []
    limit = degree - 3 if steps is None else steps
    for k in range(limit):
        surg = surgered_metric(inst, quotient_graph=True)
        qg = surg.quotient_graph
        ms = qg.degree_multiset(interior_only=True)
        out.append(FoldStep(inst, surg, sorted(ms), dict(sorted(ms.items()))))
        if set(ms) <= {3} or k + 1 == limit:
            break
        nxt = FiniteMetricSpace(qg.nodes, surg.space.rows, qg.edges)
        sub = {n for n, kind in qg.kind.items() if kind == "subdivision"}
        meta = {"scenario": "partial-fold", "params": inst.meta["params"], "step": k + 2}
        inst = fold_instance(nxt, surg.F[inst.meta["root"]], sub, qg.interior, meta)
    return out


# -- forests in finite graphs ------------------------------------------------


def graph_forest_collapse(edges, forest, basepoints=None, points=None):
    """Collapse each component of a subforest of a finite graph to a basepoint.

    ``edges`` is a list of ``(u, v, w)`` (loops and parallel edges allowed),
    ``forest`` a list of edge indices. Every edge is subdivided at its
    midpoint so that collapsed and surviving edges stay distinguishable.
    ``basepoints`` maps each component (by any of its vertices) to a vertex;
    the default is the component's first vertex.
    """
    edges = [(u, v, to_rational(w)) for u, v, w in edges]
    if points is None:
        points = []
        for u, v, _ in edges:
            for p in (u, v):
                if p not in points:
                    points.append(p)
    forest = list(forest)
    if not forest:
        raise ValueError("the forest must contain at least one edge (S nonempty)")
    uf = UnionFind(points)
    for i in forest:
        u, v, _ = edges[i]
        if uf.find(u) == uf.find(v):
            raise ValueError(f"forest edge {i} ({u!r}, {v!r}) closes a cycle")
        uf.union(u, v)
    sub_points = list(points)
    sub_edges = []
    mids = {}
    for i, (u, v, w) in enumerate(edges):
        m = f"m{i}[{u}|{v}]"
        mids[i] = m
        sub_points.append(m)
        sub_edges.append((u, m, w / 2))
        sub_edges.append((m, v, w / 2))
    X = metric_from_graph(sub_edges, sub_points)
    comp_vertices = {}
    for i in forest:
        for p in edges[i][:2]:
            comp_vertices.setdefault(uf.find(p), [])
            if p not in comp_vertices[uf.find(p)]:
                comp_vertices[uf.find(p)].append(p)
    base = {}
    chosen = dict(basepoints or {})
    for root, verts in comp_vertices.items():
        pick = next((chosen[p] for p in verts if p in chosen), None)
        if pick is None:
            pick = min(verts, key=points.index)
        if pick not in verts:
            raise ValueError(f"basepoint {pick!r} is not in its forest component")
        base[root] = pick
    f = {}
    for i in forest:
        u, v, _ = edges[i]
        b = base[uf.find(u)]
        for p in (u, mids[i], v):
            f[p] = b
    S = sorted(f, key=X.index.__getitem__)
    T = induced_subspace(X, sorted(set(base.values()), key=X.index.__getitem__))
    meta = {
        "scenario": "graph-forest",
        "params": _params(edges=len(edges), forest=[int(i) for i in forest]),
        "subdivision": set(mids.values()),
    }
    return SurgeryInstance(X, S, T, f, meta)


ROSE_GRAPH = [("a", "a", 1), ("b", "b", 1), ("a", "b", 1), ("a", "b", 1)]
ROSE_FOREST = [3]


def rose_collapse():
    """Two vertices, a loop at each, two edges between them; collapsing one of
    those edges leaves a single vertex with three loops."""
    return graph_forest_collapse(ROSE_GRAPH, ROSE_FOREST)


# -- the ray ---------------------------------------------------------------


def ray_breakpoints(N):
    a = [1 + i - Fraction(1, 2 ** i) for i in range(N + 1)]
    b = [2 + i - Fraction(1, 2 ** i) for i in range(N + 1)]
    return a, b


def ray_counterexample(N=4, resolution=None):
    """Truncation of [0, inf) at b_N with S the union of [a_i, b_i] and each
    interval sent to its left end a_i."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    h = Fraction(1, 2 ** N) if resolution is None else to_rational(resolution)
    a, b = ray_breakpoints(N)
    for i in range(N + 1):
        for name, val in (("a", a[i]), ("b", b[i])):
            if (val / h).denominator != 1:
                raise ValueError(
                    f"resolution {h} cannot represent {name}_{i} = {val}; use 2^-{N} or finer"
                )
    X = segment_space(0, b[N], h)
    S, f = [], {}
    for p in X.points:
        x = coordinate(p)
        for i in range(N + 1):
            if a[i] <= x <= b[i]:
                S.append(p)
                f[p] = point_id(a[i])
                break
    T = induced_subspace(X, [point_id(v) for v in a])
    meta = {
        "scenario": "ray",
        "params": _params(N=N, resolution=h),
        "a": [fmt(v) for v in a],
        "b": [fmt(v) for v in b],
    }
    return SurgeryInstance(X, S, T, f, meta)


SCENARIOS = {
    "interval-collapse": interval_collapse,
    "tree-collapse": tree_collapse,
    "partial-fold": partial_fold,
    "graph-forest": rose_collapse,
    "ray": ray_counterexample,
}
