from fractions import Fraction

from hypothesis import given, settings, strategies as st
import pytest

from instances import random_instance
from pseudosurgery.coarse import certify, instance_map
from pseudosurgery.metric import metric_from_graph
from pseudosurgery.oracle import (
    AdmissibleSequence,
    OracleBudgetExceeded,
    check_sequence,
    iter_sequences,
    lemma_lower_bound_audit,
    min_sequence_length,
    oracle_compare,
)
from pseudosurgery.scenarios import interval_collapse
from pseudosurgery.surgery import SurgeryInstance, surgered_metric


def literal_minimum(inst, x, y, max_pairs):
    # smallest length among literally enumerated sequences between the classes
    sx = [s for s in inst.S if inst.f[s] == inst.f.get(x)] if x in inst.f else [x]
    sy = [s for s in inst.S if inst.f[s] == inst.f.get(y)] if y in inst.f else [y]
    return min(seq.length for a in sx for b in sy
               for seq in iter_sequences(inst, a, b, max_pairs))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_branch_and_bound_matches_literal_enumeration(seed):
    inst = random_instance(seed, max_x=5, max_t=3)
    for max_pairs in (0, 1, 2):
        if len(inst.S) ** (2 * max_pairs) > 2000:
            break
        for x in inst.X.points:
            for y in inst.X.points:
                got, witness = min_sequence_length(inst, x, y, max_pairs)
                assert got == literal_minimum(inst, x, y, max_pairs)
                assert witness.length == got
                assert check_sequence(inst, witness) == []
                assert witness.k <= max_pairs


def test_witness_uses_the_target():
    X = metric_from_graph([("a", "b", 10)], ["a", "b"])
    T = metric_from_graph([("u", "v", 1)], ["u", "v"])
    inst = SurgeryInstance(X, ["a", "b"], T, {"a": "u", "b": "v"})
    length, seq = min_sequence_length(inst, "a", "b")
    assert length == 1
    assert seq.pairs == (("X", "a", "a"), ("T", "u", "v"), ("X", "b", "b"))
    assert seq.to_dict()["length"] == "1"


def test_check_sequence_catches_bad_sequences():
    inst = interval_collapse(1)
    bad = AdmissibleSequence((("X", "0", "1"), ("T", "1", "0"), ("X", "2", "3")), Fraction(2))
    problems = check_sequence(inst, bad)
    assert any("f of the preceding" in p for p in problems)
    wrong_len = AdmissibleSequence((("X", "0", "3"),), Fraction(1))
    assert check_sequence(inst, wrong_len) == ["recorded length disagrees with the pair sum"]
    assert check_sequence(inst, AdmissibleSequence((), Fraction(0))) == ["empty sequence"]


def test_budget_refuses_instead_of_truncating():
    inst = interval_collapse(3)
    with pytest.raises(OracleBudgetExceeded):
        list(iter_sequences(inst, "0", "7", 3, budget=1000))
    with pytest.raises(OracleBudgetExceeded):
        min_sequence_length(inst, "0", "7", budget=1)
    with pytest.raises(OracleBudgetExceeded):
        lemma_lower_bound_audit(inst, 1, 4, max_pairs=2, budget=10)


def test_oracle_compare_small_scenario():
    inst = interval_collapse(2)
    mismatches, n = oracle_compare(inst, surgered_metric(inst))
    assert mismatches == [] and n == 66


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_pattern_audit_agrees_with_literal_audit(seed):
    inst = random_instance(seed, max_x=4, max_t=3)
    if len(inst.S) > 3:
        return
    f, S, T = instance_map(inst)
    cert = certify(f, S, T)
    fast = lemma_lower_bound_audit(inst, cert.K, cert.C, max_pairs=1)
    slow = lemma_lower_bound_audit(inst, cert.K, cert.C, max_pairs=1, exhaustive=True)
    assert fast.passed and slow.passed
    assert fast.tightest_slack == slow.tightest_slack


def test_lemma_audit_refuses_bad_constants():
    from pseudosurgery.coarse import CertificateRefused
    with pytest.raises(CertificateRefused):
        lemma_lower_bound_audit(interval_collapse(1), 1, 0)
