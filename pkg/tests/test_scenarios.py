from fractions import Fraction

import pytest

from pseudosurgery.coarse import certify, instance_map, lipschitz_constant, verify_certificate
from pseudosurgery.metric import validate_metric
from pseudosurgery.scenarios import (
    interval_collapse,
    iterate_partial_fold,
    partial_fold,
    ray_breakpoints,
    ray_counterexample,
    rose_collapse,
    tree_collapse,
)
from pseudosurgery.surgery import surgered_metric


def test_interval_collapse_shape():
    inst = interval_collapse(2, Fraction(1, 2))
    assert len(inst.X) == 11
    assert inst.T.points == ("0", "1", "2")
    assert inst.f["5"] == "2" and inst.f["1"] == "0" and "3/2" not in inst.f
    with pytest.raises(ValueError):
        interval_collapse(2, Fraction(2, 3))
    with pytest.raises(ValueError):
        interval_collapse(-1)


def test_interval_collapse_map_constants():
    f, S, T = instance_map(interval_collapse(2))
    # 1 and 2 are adjacent ends of different intervals
    assert lipschitz_constant(f, S, T) == 1
    cert = certify(f, S, T)
    assert (cert.K, cert.C) == (1, 3)


def test_tree_collapse_orbit_choice():
    inst = tree_collapse(2)
    tb = inst.meta["tree"]
    mid = tb.midpoint_of("1", "g1")
    assert inst.f["1"] == inst.f["g1"] == mid
    # g1 ends in g1^1 (odd power), so the edge to g1^2 stays
    assert "g1^2" not in inst.f
    with pytest.raises(ValueError):
        tree_collapse(1)


def test_tree_collapse_degree_six_interior():
    inst = tree_collapse(3)
    s = surgered_metric(inst, quotient_graph=True)
    assert s.quotient_graph.degree_spectrum(interior_only=True) == [6]
    f, S, T = instance_map(inst)
    interior = [p for p in inst.X.points if p in inst.meta["interior"]]
    assert verify_certificate(f, S, T, 2, 1, "pseudo", interior).valid


def test_partial_fold_steps():
    steps = iterate_partial_fold(5, 3, 2)
    assert [set(st.spectrum) for st in steps] == [{3, 4}, {3}]
    first = steps[0].instance
    f, S, T = instance_map(first)
    assert verify_certificate(f, S, T, 3, 1).valid
    for st in steps:
        assert validate_metric(st.surgered.space).ok


def test_partial_fold_degree_four_needs_one_step():
    steps = iterate_partial_fold(4, 3)
    assert len(steps) == 1 and steps[0].spectrum == [3]
    with pytest.raises(ValueError):
        partial_fold(3, 3)


def test_ray_breakpoints():
    a, b = ray_breakpoints(3)
    assert a == [0, Fraction(3, 2), Fraction(11, 4), Fraction(31, 8)]
    assert b == [1, Fraction(5, 2), Fraction(15, 4), Fraction(39, 8)]
    with pytest.raises(ValueError):
        ray_counterexample(3, Fraction(1, 4))


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_ray_lipschitz_grows(N):
    inst = ray_counterexample(N)
    f, S, T = instance_map(inst)
    assert lipschitz_constant(f, S, T) == 2 ** N + 1
    s = surgered_metric(inst)
    b = inst.meta["b"][-1]
    assert s.dist_x("0", b) == 1 - Fraction(1, 2 ** N)
    assert verify_certificate(f, S, T, 1, 2, "quasi").valid


def test_rose_collapse_is_a_graph_quotient():
    s = surgered_metric(rose_collapse(), quotient_graph=True)
    assert s.quotient_graph.path_metric().same_as(s.space)
