"""Gluing X to T along f, the surgered metric, and the induced map F."""

from collections import Counter
from dataclasses import dataclass, field

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .metric import FiniteMetricSpace, all_pairs_shortest_paths, validate_metric


class SurgeryInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurgeryInstance:
    """A space X, a subset S of X, a target space T and a map f: S -> T.

    ``meta`` carries generator bookkeeping (root, interior points,
    subdivision points, provenance) and plays no role in the mathematics.
    """

    X: FiniteMetricSpace
    S: tuple
    T: FiniteMetricSpace
    f: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        S = tuple(self.S)
        object.__setattr__(self, "S", S)
        if not S:
            raise SurgeryInputError("S must be nonempty")
        if len(set(S)) != len(S):
            raise SurgeryInputError("S lists a point twice")
        for s in S:
            if s not in self.X.index:
                raise SurgeryInputError(f"S-point {s!r} is not a point of X")
            if s not in self.f:
                raise SurgeryInputError(f"f is undefined on {s!r}")
            if self.f[s] not in self.T.index:
                raise SurgeryInputError(f"f({s!r}) = {self.f[s]!r} is not a point of T")
        extra = set(self.f) - set(S)
        if extra:
            raise SurgeryInputError(f"f is defined outside S: {sorted(extra)[:3]}")

    def preimage(self, t):
        return [s for s in self.S if self.f[s] == t]

    def image(self):
        seen = set(self.f[s] for s in self.S)
        return [t for t in self.T.points if t in seen]


class UnionFind:
    def __init__(self, items=()):
        self.parent = {}
        for x in items:
            self.parent[x] = x

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
        return ra


@dataclass(frozen=True, eq=False)
class GluedSpace:
    """X ⊔ T with s identified to f(s).

    Nodes are tagged ``("X", id)`` or ``("T", id)``. ``class_of`` is the
    quotient map j; ``class_type`` is 1 (singleton of X \\ S), 2 (class of
    an S-point) or 3 (class of a T-point with no preimage).
    """

    nodes: tuple
    glue_edges: tuple
    class_of: dict
    class_members: dict
    class_type: dict
    order: tuple


def _class_names(inst, groups):
    # a class is named after its first X-member, else "T:<id>"
    used = set(inst.X.points)
    names = {}
    for key, members in groups.items():
        xs = [p for tag, p in members if tag == "X"]
        if xs:
            names[key] = min(xs, key=inst.X.index.__getitem__)
        else:
            t = next(p for tag, p in members if tag == "T")
            name = f"T:{t}"
            while name in used:
                name = "T:" + name
            names[key] = name
        used.add(names[key])
    return names


def build_glued_space(inst):
    nodes = [("X", p) for p in inst.X.points] + [("T", t) for t in inst.T.points]
    uf = UnionFind(nodes)
    glue = []
    for s in inst.S:
        t = inst.f[s]
        if t not in inst.T.index:
            raise SurgeryInputError(f"f({s!r}) = {t!r} is not a point of T")
        uf.union(("T", t), ("X", s))
        glue.append((("X", s), ("T", t)))
    groups = {}
    for n in nodes:
        groups.setdefault(uf.find(n), []).append(n)
    names = _class_names(inst, groups)
    class_of = {n: names[uf.find(n)] for n in nodes}
    members = {}
    for n in nodes:
        members.setdefault(class_of[n], []).append(n)
    S = set(inst.S)
    ctype = {}
    for c, ms in members.items():
        xs = [p for tag, p in ms if tag == "X"]
        if len(ms) == 1 and xs and xs[0] not in S:
            ctype[c] = 1
        elif xs:
            ctype[c] = 2
        else:
            ctype[c] = 3
    x_first = []
    seen = set()
    for n in nodes:
        c = class_of[n]
        if c not in seen:
            seen.add(c)
            x_first.append(c)
    return GluedSpace(
        tuple(nodes),
        tuple(glue),
        class_of,
        {c: tuple(ms) for c, ms in members.items()},
        ctype,
        tuple(x_first),
    )


def _class_adjacency(inst, glued, use_graphs=True):
    best = {c: {} for c in glued.order}

    def add(a, b, w):
        if a == b:
            return
        if b not in best[a] or w < best[a][b]:
            best[a][b] = w
            best[b][a] = w

    for tag, space in (("X", inst.X), ("T", inst.T)):
        cls = [glued.class_of[(tag, p)] for p in space.points]
        if use_graphs and space.graph is not None:
            for u, v, w in space.graph:
                add(glued.class_of[(tag, u)], glued.class_of[(tag, v)], w)
        else:
            for i, row in enumerate(space.rows):
                for j in range(i + 1, len(row)):
                    add(cls[i], cls[j], row[j])
    return {c: list(nb.items()) for c, nb in best.items()}


@dataclass(frozen=True, eq=False)
class SurgeredSpace:
    """The surgered space: class ids with the quotient metric, plus F.

    ``F`` sends X-points to class ids and ``T_image`` does the same for
    T-points. ``quotient_graph`` is filled when both inputs are graph-backed
    and it was requested.
    """

    space: FiniteMetricSpace
    F: dict
    T_image: dict
    glued: GluedSpace
    quotient_graph: object = None

    def d(self, a, b):
        return self.space.d(a, b)

    def dist_x(self, x, y):
        return self.space.d(self.F[x], self.F[y])

    def classes(self):
        return self.space.points

    def members(self, c):
        return self.glued.class_members[c]


def surgered_metric(inst, quotient_graph=False):
    """Exact metric on the surgered space.

    Shortest paths run on the class graph: X-edges weighted by d_X, T-edges
    by d_T, glue pairs contracted. Backing graphs are used in place of
    complete graphs when present, which gives the same distances.
    """
    glued = build_glued_space(inst)
    adj = _class_adjacency(inst, glued)
    order = glued.order
    rows = all_pairs_shortest_paths(order, adj)
    for c, row in zip(order, rows):
        if None in row:
            missing = order[row.index(None)]
            raise SurgeryInputError(f"classes {c!r} and {missing!r} are disconnected")
    space = FiniteMetricSpace(order, tuple(rows))
    F = {p: glued.class_of[("X", p)] for p in inst.X.points}
    T_image = {t: glued.class_of[("T", t)] for t in inst.T.points}
    qg = None
    if quotient_graph:
        qg = _quotient_graph(inst, glued, space)
    return SurgeredSpace(space, F, T_image, glued, qg)


def induced_map(inst, surgered):
    """F as a dict, plus the distance from each F-less class to the image of F.

    The report has one entry per class containing no X-point:
    ``{"class", "nearest", "distance"}``.
    """
    F = dict(surgered.F)
    image = []
    seen = set()
    for p in inst.X.points:
        if F[p] not in seen:
            seen.add(F[p])
            image.append(F[p])
    report = []
    for c in surgered.space.points:
        if c in seen:
            continue
        row = surgered.space.row(c)
        idx = surgered.space.index
        nearest = min(image, key=lambda k: (row[idx[k]], idx[k]))
        report.append({"class": c, "nearest": nearest, "distance": row[idx[nearest]]})
    return F, report


# -- quotient graphs -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuotientGraph:
    """Contracted multigraph of a graph-backed surgery.

    ``kind`` marks each node ``"vertex"`` or ``"subdivision"`` (a degree-2
    point inserted to subdivide an edge). ``interior`` is the set of nodes
    all of whose members were interior in the input.
    """

    nodes: tuple
    edges: tuple
    kind: dict
    interior: frozenset

    def degree(self):
        deg = Counter({n: 0 for n in self.nodes})
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return dict(deg)

    def branch_nodes(self):
        deg = self.degree()
        return [n for n in self.nodes
                if not (self.kind.get(n) == "subdivision" and deg[n] == 2)]

    def degree_multiset(self, interior_only=False):
        deg = self.degree()
        nodes = self.branch_nodes()
        if interior_only:
            nodes = [n for n in nodes if n in self.interior]
        return Counter(deg[n] for n in nodes)

    def degree_spectrum(self, interior_only=True):
        return sorted(self.degree_multiset(interior_only))

    def smooth(self):
        """Erase degree-2 subdivision nodes, joining their two edges."""
        edges = [list(e) for e in self.edges]
        deg = self.degree()
        drop = set()
        for n in self.nodes:
            if self.kind.get(n) != "subdivision" or deg[n] != 2:
                continue
            inc = [e for e in edges if n in (e[0], e[1])]
            if len(inc) != 2:
                continue  # a lone loop
            (a, b, w1), (c, d, w2) = inc
            x = b if a == n else a
            y = d if c == n else c
            edges = [e for e in edges if e is not inc[0] and e is not inc[1]]
            edges.append([x, y, w1 + w2])
            drop.add(n)
        nodes = tuple(n for n in self.nodes if n not in drop)
        return QuotientGraph(nodes, tuple(tuple(e) for e in edges),
                             {n: self.kind[n] for n in nodes},
                             frozenset(n for n in self.interior if n not in drop))

    def path_metric(self):
        from .metric import metric_from_graph
        return metric_from_graph(self.edges, self.nodes)


def _quotient_graph(inst, glued, surgered_space):
    if inst.X.graph is None:
        raise SurgeryInputError(
            "quotient_graph needs a graph-backed X; use surgered_metric for plain tables"
        )
    S = set(inst.S)
    cls = glued.class_of
    rank = {c: i for i, c in enumerate(glued.order)}
    kept = []
    folded = {}
    for u, v, w in inst.X.graph:
        a, b = cls[("X", u)], cls[("X", v)]
        if u in S and v in S:
            # both ends surgered: a loop is collapsed away, parallels fold together
            if a == b:
                continue
            key = (a, b) if rank[a] <= rank[b] else (b, a)
            if key not in folded or w < folded[key]:
                folded[key] = w
        else:
            kept.append((a, b, w))
    if inst.T.graph is not None:
        for u, v, w in inst.T.graph:
            a, b = cls[("T", u)], cls[("T", v)]
            if a == b:
                continue
            key = (a, b) if rank[a] <= rank[b] else (b, a)
            if key not in folded or w < folded[key]:
                folded[key] = w
    edges = kept + [(a, b, w) for (a, b), w in folded.items()]
    subdivision = set(inst.meta.get("subdivision", ()))
    interior_in = inst.meta.get("interior")
    kind = {}
    interior = set()
    for c in glued.order:
        members = glued.class_members[c]
        xs = [p for tag, p in members if tag == "X"]
        kind[c] = "subdivision" if len(members) == 1 and xs and xs[0] in subdivision else "vertex"
        if interior_in is None or (xs and all(p in interior_in for p in xs)):
            interior.add(c)
    qg = QuotientGraph(glued.order, tuple(edges), kind, frozenset(interior))
    realized = qg.path_metric()
    if realized.rows != surgered_space.rows:
        raise SurgeryInputError(
            "the contracted graph does not realize the surgered metric; "
            "T's metric is not compatible with X's graph"
        )
    return qg


def quotient_graph(inst):
    return surgered_metric(inst, quotient_graph=True).quotient_graph


# -- estimator -------------------------------------------------------------


class Surgery(TransformerMixin, BaseEstimator):
    """Estimator-style wrapper: ``fit`` builds the surgered space and
    ``transform`` applies the induced map F to X-point ids.

    >>> s = Surgery().fit(instance)             # doctest: +SKIP
    >>> s.transform(["0", "4"])                 # doctest: +SKIP
    """

    def __init__(self, quotient_graph=False, validate=True):
        self.quotient_graph = quotient_graph
        self.validate = validate

    def fit(self, instance, y=None):
        from .validation import check_instance
        inst = check_instance(instance, validate_metrics=self.validate)
        self.instance_ = inst
        self.surgered_ = surgered_metric(inst, quotient_graph=self.quotient_graph)
        self.classes_ = self.surgered_.space.points
        self.F_ = self.surgered_.F
        self.quotient_graph_ = self.surgered_.quotient_graph
        return self

    def transform(self, X):
        check_is_fitted(self, "surgered_")
        return [self.F_[p] for p in X]

    def distance(self, x, y):
        check_is_fitted(self, "surgered_")
        return self.surgered_.dist_x(x, y)

    def pairwise_distances(self, points=None):
        check_is_fitted(self, "surgered_")
        pts = self.instance_.X.points if points is None else list(points)
        return [[self.surgered_.dist_x(p, q) for q in pts] for p in pts]

    def metric_report(self):
        check_is_fitted(self, "surgered_")
        return validate_metric(self.surgered_.space)

