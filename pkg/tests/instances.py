"""Seeded random surgery instances shared by the test modules."""

from fractions import Fraction
import random

from pseudosurgery.metric import metric_from_graph, space_from_rows
from pseudosurgery.surgery import SurgeryInstance

WEIGHTS = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(5, 4)]


def random_space(rng, n, prefix, graph_backed=None):
    """A random metric on n points: shortest paths of a random connected
    weighted graph, kept either with its graph or as a bare matrix."""
    pts = [f"{prefix}{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        edges.append((pts[rng.randrange(i)], pts[i], rng.choice(WEIGHTS)))
    for _ in range(rng.randrange(n + 1)):
        a, b = rng.sample(pts, 2) if n > 1 else (pts[0], pts[0])
        if a != b:
            edges.append((a, b, rng.choice(WEIGHTS)))
    space = metric_from_graph(edges, pts)
    if graph_backed is None:
        graph_backed = rng.random() < 0.5
    if graph_backed:
        return space
    return space_from_rows(space.points, space.rows)


def random_instance(seed, max_x=8, max_t=4):
    rng = random.Random(seed)
    nx = rng.randint(1, max_x)
    nt = rng.randint(1, max_t)
    X = random_space(rng, nx, "x")
    T = random_space(rng, nt, "t")
    k = rng.randint(1, nx)
    S = sorted(rng.sample(X.points, k), key=X.index.__getitem__)
    f = {s: rng.choice(T.points) for s in S}
    return SurgeryInstance(X, S, T, f, {"seed": seed})


def random_instances(count, start=0, **kw):
    return [random_instance(start + i, **kw) for i in range(count)]
