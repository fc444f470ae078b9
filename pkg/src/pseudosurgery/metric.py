"""Finite metric spaces with exact rational distances."""

from dataclasses import dataclass, field
from fractions import Fraction
import heapq
from math import lcm

import numpy as np

from .rational import to_rational


class MetricStructureError(ValueError):
    """A distance table that is not even shaped like a metric (as opposed to
    one that merely violates an axiom)."""


class DisconnectedGraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Labelled points with an exact pairwise distance table.

    ``graph`` is an optional weighted edge list ``(u, v, w)`` realizing the
    table as a shortest-path metric. It may contain loops and parallel edges.
    """

    points: tuple
    rows: tuple
    graph: tuple = None
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {p: i for i, p in enumerate(self.points)})
        if len(self.index) != len(self.points):
            raise MetricStructureError("duplicate point identifiers")

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return p in self.index

    def __repr__(self):
        kind = "graph" if self.graph is not None else "matrix"
        return f"FiniteMetricSpace(n={len(self.points)}, {kind})"

    def d(self, p, q):
        return self.rows[self.index[p]][self.index[q]]

    def row(self, p):
        return self.rows[self.index[p]]

    def pairs(self, points=None):
        """Unordered pairs of distinct points, in point order."""
        if points is None:
            pts = self.points
        else:
            keep = set(points)
            pts = [p for p in self.points if p in keep]
        for i, p in enumerate(pts):
            for q in pts[i + 1:]:
                yield p, q

    def diameter(self):
        return max((max(r) for r in self.rows), default=Fraction(0))

    def same_as(self, other):
        return self.points == other.points and self.rows == other.rows


def _square_rows(points, rows):
    n = len(points)
    if len(rows) != n:
        raise MetricStructureError(f"table has {len(rows)} rows for {n} points")
    out = []
    for i, r in enumerate(rows):
        if len(r) != n:
            raise MetricStructureError(f"row {points[i]!r} has {len(r)} entries, expected {n}")
        vals = tuple(to_rational(v) for v in r)
        for j, v in enumerate(vals):
            if v < 0:
                raise MetricStructureError(
                    f"negative entry {v} at ({points[i]!r}, {points[j]!r})"
                )
        out.append(vals)
    return tuple(out)


@dataclass
class MetricReport:
    ok: bool
    violations: list

    def __bool__(self):
        return self.ok


def _integer_table(rows):
    """Scale an exact table to integers so axiom checks can run in numpy."""
    den = 1
    for r in rows:
        for v in r:
            den = lcm(den, v.denominator)
    ints = [[int(v * den) for v in r] for r in rows]
    biggest = max((max(r) for r in ints), default=0)
    dtype = np.int64 if 2 * biggest < 2**62 else object
    return np.array(ints, dtype=dtype).reshape(len(rows), len(rows))


def validate_metric(rows, points=None):
    """Check the metric axioms exactly.

    Returns a :class:`MetricReport` listing every violated instance:
    ``("reflexivity", (p,))``, ``("symmetry", (p, q))``,
    ``("positivity", (p, q))`` and ``("triangle", (p, q, r))`` where
    ``d(p, r) > d(p, q) + d(q, r)``. Structural problems (non-square
    table, negative entries) raise :class:`MetricStructureError`.
    """
    if isinstance(rows, FiniteMetricSpace):
        points, rows = rows.points, rows.rows
    if points is None:
        points = tuple(str(i) for i in range(len(rows)))
    points = tuple(points)
    rows = _square_rows(points, rows)
    n = len(points)
    violations = []
    if n == 0:
        return MetricReport(True, violations)
    D = _integer_table(rows)
    for i in range(n):
        if D[i, i] != 0:
            violations.append(("reflexivity", (points[i],)))
    for i, j in zip(*np.nonzero(D != D.T)):
        if i < j:
            violations.append(("symmetry", (points[i], points[j])))
    for i, j in zip(*np.nonzero(D == 0)):
        if i < j:
            violations.append(("positivity", (points[i], points[j])))
    for q in range(n):
        bad = D > D[:, q, None] + D[None, q, :]
        for p, r in zip(*np.nonzero(bad)):
            violations.append(("triangle", (points[p], points[q], points[r])))
    return MetricReport(not violations, violations)


def space_from_rows(points, rows, check=True):
    points = tuple(points)
    rows = _square_rows(points, rows)
    if check:
        report = validate_metric(rows, points)
        if not report.ok:
            kind, witness = report.violations[0]
            raise ValueError(f"not a metric: {kind} violated at {witness}")
    return FiniteMetricSpace(points, rows)


def _adjacency(points, edges):
    adj = {p: [] for p in points}
    for u, v, w in edges:
        if u not in adj or v not in adj:
            missing = u if u not in adj else v
            raise KeyError(f"edge endpoint {missing!r} is not a declared point")
        if u == v:
            continue
        adj[u].append((v, w))
        adj[v].append((u, w))
    return adj


def dijkstra(adj, sources):
    """Exact single-source (or multi-source, all at distance 0) shortest paths."""
    dist = {}
    heap = [(Fraction(0), i, s) for i, s in enumerate(sources)]
    heapq.heapify(heap)
    tie = len(heap)
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in dist:
            continue
        dist[u] = d
        for v, w in adj[u]:
            if v not in dist:
                tie += 1
                heapq.heappush(heap, (d + w, tie, v))
    return dist


def all_pairs_shortest_paths(nodes, adj):
    """Rows of exact shortest-path distances between ``nodes``.

    Weights are rescaled to a common integer unit first; the search itself
    then compares plain ints. Unreachable targets are ``None``.
    """
    den = 1
    for nb in adj.values():
        for _, w in nb:
            den = lcm(den, w.denominator)
    rank = {n: i for i, n in enumerate(nodes)}
    iadj = [[(rank[v], int(w * den)) for v, w in adj[n]] for n in nodes]
    rows = []
    for src in range(len(nodes)):
        dist = [None] * len(nodes)
        heap = [(0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if dist[u] is not None:
                continue
            dist[u] = d
            for v, w in iadj[u]:
                if dist[v] is None:
                    heapq.heappush(heap, (d + w, v))
        rows.append(tuple(None if d is None else Fraction(d, den) for d in dist))
    return rows


def normalize_edges(edges):
    out = []
    for e in edges:
        u, v, w = e
        w = to_rational(w)
        if w < 0:
            raise MetricStructureError(f"negative weight on edge ({u!r}, {v!r})")
        out.append((u, v, w))
    return tuple(out)


def metric_from_graph(edges, points):
    """Shortest-path metric of a weighted graph over the declared points.

    Zero-weight edges between distinct points would violate positivity and
    surface through :func:`validate_metric`, not here.
    """
    points = tuple(points)
    edges = normalize_edges(edges)
    adj = _adjacency(points, edges)
    rows = all_pairs_shortest_paths(points, adj)
    for p, row in zip(points, rows):
        if None in row:
            q = points[row.index(None)]
            raise DisconnectedGraphError(f"no path between {p!r} and {q!r}")
    return FiniteMetricSpace(points, tuple(rows), edges)


def induced_subspace(space, subset):
    """Restrict ``space`` to ``subset``; distances are copied, not re-derived."""
    subset = list(subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    for p in subset:
        if p not in space.index:
            raise KeyError(f"unknown point {p!r}")
    keep = set(subset)
    pts = tuple(p for p in space.points if p in keep)
    idx = [space.index[p] for p in pts]
    rows = tuple(tuple(space.rows[i][j] for j in idx) for i in idx)
    return FiniteMetricSpace(pts, rows)


def point_id(q):
    return str(Fraction(q))


def segment_space(a, b, resolution):
    """Sample points a, a + resolution, ..., b of the real line.

    Points are named by their exact coordinate; the space is backed by the
    path graph so that surgery can run on it without a complete graph.
    """
    a, b, h = to_rational(a), to_rational(b), to_rational(resolution)
    if not a < b:
        raise ValueError("need a < b")
    if h <= 0:
        raise ValueError("resolution must be positive")
    steps = (b - a) / h
    if steps.denominator != 1:
        raise ValueError(f"span {b - a} is not a multiple of resolution {h}")
    coords = [a + k * h for k in range(int(steps) + 1)]
    pts = tuple(point_id(c) for c in coords)
    # |c_i - c_j| = h * |i - j|
    steps_h = [k * h for k in range(len(coords))]
    rows = tuple(tuple(steps_h[abs(i - j)] for j in range(len(coords)))
                 for i in range(len(coords)))
    edges = tuple((pts[k], pts[k + 1], h) for k in range(len(pts) - 1))
    return FiniteMetricSpace(pts, rows, edges)


def coordinate(point):
    return Fraction(point)


# -- regular trees ---------------------------------------------------------

_CAYLEY_LETTERS = (("g1", 1), ("g1", -1), ("g2", 1), ("g2", -1))


def _word_id(word):
    if not word:
        return "1"
    out = []
    for gen, power in word:
        out.append(gen if power == 1 else f"{gen}^{power}")
    return "".join(out)


def _extend(word, gen, sign):
    word = list(word)
    if word and word[-1][0] == gen:
        p = word[-1][1] + sign
        if p == 0:
            word.pop()
        else:
            word[-1] = (gen, p)
    else:
        word.append((gen, sign))
    return tuple(word)


@dataclass(frozen=True, eq=False)
class TreeBall:
    """A ball in a regular tree plus the bookkeeping surgery scenarios need.

    ``depth`` is the exact distance from the root. ``midpoints`` maps each
    midpoint id to the (parent, child) pair of its edge. For degree 4,
    ``words`` gives each vertex as a reduced word in the free group on
    g1, g2 and ``orbit`` labels each edge ``"horizontal"`` (a g1-edge) or
    ``"vertical"`` (a g2-edge), keyed by (w, w·g).
    """

    space: FiniteMetricSpace
    degree: int
    radius: int
    root: str
    depth: dict
    parent: dict
    children: dict
    midpoints: dict
    words: dict = None
    orbit: dict = None

    def vertices(self):
        return [p for p in self.space.points if p not in self.midpoints]

    def interior(self, interior_radius=None):
        """Points whose full neighbourhood lies inside the ball."""
        r = self.radius - 1 if interior_radius is None else to_rational(interior_radius)
        out = []
        for p in self.space.points:
            if p in self.midpoints:
                a, b = self.midpoints[p]
                if self.depth[a] <= r and self.depth[b] <= r:
                    out.append(p)
            elif self.depth[p] <= r:
                out.append(p)
        return out

    def midpoint_of(self, u, v):
        return self._mid_lookup.get((u, v)) or self._mid_lookup.get((v, u))

    @property
    def _mid_lookup(self):
        return {ends: m for m, ends in self.midpoints.items()}


def tree_ball(degree, radius, subdivide=False):
    """Ball of the given radius about the root of the degree-regular tree.

    Children are generated in a fixed order: for degree 4 the generator
    labels g1, g1^-1, g2, g2^-1 (vertex ids are reduced words), otherwise
    child indices 0, 1, ... (vertex ids are dotted index paths).
    """
    if degree < 3:
        raise ValueError("degree must be at least 3")
    if radius < 1:
        raise ValueError("radius must be at least 1")
    cayley = degree == 4
    root_word = ()
    root = _word_id(root_word) if cayley else "v"
    words = {root: root_word} if cayley else None
    orbit = {} if cayley else None
    depth = {root: Fraction(0)}
    parent = {root: None}
    children = {root: []}
    tree_edges = []
    frontier = [root]
    for level in range(1, radius + 1):
        nxt = []
        for u in frontier:
            if cayley:
                back = None
                if words[u]:
                    gen, power = words[u][-1]
                    back = (gen, -1 if power > 0 else 1)
                for gen, sign in _CAYLEY_LETTERS:
                    if (gen, sign) == back:
                        continue
                    w = _extend(words[u], gen, sign)
                    v = _word_id(w)
                    words[v] = w
                    # orbit key is (x, x*g) with positive generator
                    key = (u, v) if sign == 1 else (v, u)
                    orbit[key] = "horizontal" if gen == "g1" else "vertical"
                    nxt.append((u, v))
            else:
                count = degree if parent[u] is None else degree - 1
                for k in range(count):
                    v = f"{u}.{k}"
                    nxt.append((u, v))
        frontier = []
        for u, v in nxt:
            depth[v] = Fraction(level)
            parent[v] = u
            children[v] = []
            children[u].append(v)
            tree_edges.append((u, v))
            frontier.append(v)
    points = [root]
    edges = []
    midpoints = {}
    for u, v in tree_edges:
        if subdivide:
            m = f"m[{u}|{v}]"
            midpoints[m] = (u, v)
            depth[m] = depth[u] + Fraction(1, 2)
            points.extend([m, v])
            edges.append((u, m, Fraction(1, 2)))
            edges.append((m, v, Fraction(1, 2)))
        else:
            points.append(v)
            edges.append((u, v, Fraction(1)))
    space = metric_from_graph(edges, points)
    return TreeBall(space, degree, radius, root, depth, parent, children,
                    midpoints, words, orbit)
