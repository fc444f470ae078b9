"""Brute-force admissible sequences, straight from their definition.

Nothing here uses shortest-path machinery: lengths are sums over literal
alternating X-pairs and T-pairs. The surgery engine is checked against it.
"""

from dataclasses import dataclass
from fractions import Fraction
import itertools

from .coarse import CertificateRefused, instance_map, verify_certificate
from .rational import fmt
from .validation import check_constants

DEFAULT_BUDGET = 1_000_000


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class AdmissibleSequence:
    """Alternating pairs ``("X", x, y)`` and ``("T", u, v)``.

    The first and last X-pairs may be missing, in which case the sequence
    starts at u_1 (ends at v_k) in T.
    """

    pairs: tuple
    length: Fraction

    @property
    def k(self):
        return sum(1 for tag, _, _ in self.pairs if tag == "T")

    def endpoints(self):
        first, last = self.pairs[0], self.pairs[-1]
        return (first[0], first[1]), (last[0], last[2])

    def to_dict(self):
        return {
            "pairs": [{"space": tag, "pair": [a, b]} for tag, a, b in self.pairs],
            "length": fmt(self.length),
        }


def sequence_length(inst, pairs):
    total = Fraction(0)
    for tag, a, b in pairs:
        total += (inst.X if tag == "X" else inst.T).d(a, b)
    return total


def check_sequence(inst, seq):
    """Return a list of broken conditions (empty when admissible)."""
    problems = []
    pairs = list(seq.pairs)
    if not pairs:
        return ["empty sequence"]
    S = set(inst.S)
    # interleaving: X, T, X, T, ..., with optional missing ends
    tags = [t for t, _, _ in pairs]
    for a, b in zip(tags, tags[1:]):
        if a == b:
            problems.append("pairs must alternate between X and T")
            break
    for idx, (tag, a, b) in enumerate(pairs):
        space = inst.X if tag == "X" else inst.T
        if a not in space or b not in space:
            problems.append(f"pair {idx} has a point outside {tag}")
            continue
        if tag != "T":
            continue
        prev = pairs[idx - 1] if idx > 0 else None
        nxt = pairs[idx + 1] if idx + 1 < len(pairs) else None
        if prev is not None:
            y = prev[2]
            if y not in S or inst.f[y] != a:
                problems.append(f"u at pair {idx} is not f of the preceding y")
        if nxt is not None:
            x = nxt[1]
            if x not in S or inst.f[x] != b:
                problems.append(f"v at pair {idx} is not f of the following x")
    if sequence_length(inst, pairs) != seq.length:
        problems.append("recorded length disagrees with the pair sum")
    return problems


def _class_members_x(inst, p):
    if p in set(inst.S):
        t = inst.f[p]
        return [s for s in inst.S if inst.f[s] == t]
    return [p]


def iter_sequences(inst, x, y, max_pairs, budget=DEFAULT_BUDGET):
    """Every admissible sequence from x to y (both pairs present) with at
    most ``max_pairs`` T-pairs. Refuses rather than truncating."""
    S = inst.S
    total = sum(len(S) ** (2 * k) for k in range(max_pairs + 1))
    if total > budget:
        raise OracleBudgetExceeded(
            f"{total} sequences exceed the budget of {budget}; lower max_pairs"
        )
    f = inst.f
    for k in range(max_pairs + 1):
        for ys in itertools.product(S, repeat=k):
            for xs in itertools.product(S, repeat=k):
                pts = [x, *sum(zip(ys, xs), ()), y]
                pairs = []
                for i in range(k + 1):
                    pairs.append(("X", pts[2 * i], pts[2 * i + 1]))
                    if i < k:
                        pairs.append(("T", f[ys[i]], f[xs[i]]))
                yield AdmissibleSequence(tuple(pairs), sequence_length(inst, pairs))


def min_sequence_length(inst, frm, to, max_pairs=None, budget=DEFAULT_BUDGET, cache=None):
    """Exact minimum of the length over admissible sequences between the
    classes of two X-points, using at most ``max_pairs`` T-pairs.

    Branch and bound: a partial sequence is dropped when its length already
    reaches the incumbent (ties go to fewer T-pairs), or when the same T-point was reached earlier with
    no more T-pairs and no greater length. Both rules only discard sequences
    that some kept one matches or beats.

    ``cache`` may be a dict shared across calls on the same instance; it
    holds the cheapest one-step extensions out of each preimage.

    Returns ``(length, witness)``.
    """
    if max_pairs is None:
        max_pairs = len(inst.X) + len(inst.T)
    if max_pairs < 0:
        raise ValueError("max_pairs must be nonnegative")
    X, T, f, S = inst.X, inst.T, inst.f, inst.S
    starts = tuple(_class_members_x(inst, frm))
    ends = tuple(_class_members_x(inst, to))
    pre = {}
    for s in S:
        pre.setdefault(f[s], []).append(s)
    image = [t for t in T.points if t in pre]

    best_len = None
    best = None
    best_k = 0
    for a in starts:
        for b in ends:
            d = X.d(a, b)
            if best_len is None or d < best_len:
                best_len, best = d, [("X", a, b)]
    if max_pairs == 0:
        return best_len, AdmissibleSequence(tuple(best), best_len)

    expansions = 0
    seen = {}

    def dominated(v, h, L):
        for h0, L0 in seen.get(v, ()):
            if h0 <= h and L0 <= L:
                return True
        seen.setdefault(v, []).append((h, L))
        return False

    def tick():
        nonlocal expansions
        expansions += 1
        if expansions > budget:
            raise OracleBudgetExceeded(
                f"search exceeded {budget} expansions; raise --budget or shrink the instance"
            )

    legs_memo = {} if cache is None else cache

    def step_table(key, sources):
        # cheapest X-pair (x, y) from the sources followed by a T-pair
        # (f(y), v), for each v; only the cheapest choice per v can survive
        # the dominance rule
        if key not in legs_memo:
            legs = {}
            for u in image:
                legs[u] = min(((X.d(x, y), x, y) for x in sources for y in pre[u]),
                              key=lambda e: (e[0], X.index[e[1]], X.index[e[2]]))
            best_v = {}
            for u in image:
                d, x, y = legs[u]
                for v in image:
                    total = d + T.d(u, v)
                    if v not in best_v or total < best_v[v][0]:
                        best_v[v] = (total, v, (("X", x, y), ("T", u, v)))
            legs_memo[key] = sorted(best_v.values(), key=lambda e: (e[0], T.index[e[1]]))
        return legs_memo[key]

    def steps_from(key, sources, L):
        return [(L + d, v, list(legs)) for d, v, legs in step_table(key, sources)]

    def search(v, h, L, path):
        nonlocal best_len, best, best_k
        tick()
        key = ("end", v, ends)
        if key not in legs_memo:
            legs_memo[key] = min(((X.d(x, b), x, b) for x in pre[v] for b in ends),
                                 key=lambda e: (e[0], X.index[e[1]], X.index[e[2]]))
        d, x, b = legs_memo[key]
        if (L + d, h) < (best_len, best_k):
            best_len, best, best_k = L + d, path + [("X", x, b)], h
        if h == max_pairs:
            return
        for L2, v2, legs in steps_from(v, pre[v], L):
            if (L2, h + 1) >= (best_len, best_k):
                break
            if dominated(v2, h + 1, L2):
                continue
            search(v2, h + 1, L2, path + legs)

    for L1, v1, legs in steps_from(("start", starts), starts, Fraction(0)):
        if (L1, 1) >= (best_len, best_k):
            break
        if dominated(v1, 1, L1):
            continue
        search(v1, 1, L1, legs)
    return best_len, AdmissibleSequence(tuple(best), best_len)


@dataclass
class LemmaAudit:
    K: Fraction
    C: Fraction
    passed: bool
    patterns_checked: int
    sequences_covered: int
    tightest_slack: Fraction
    tightest: tuple
    failures: list

    def to_dict(self):
        return {
            "K": fmt(self.K),
            "C": fmt(self.C),
            "passed": self.passed,
            "patterns_checked": self.patterns_checked,
            "sequences_covered": self.sequences_covered,
            "tightest_slack": None if self.tightest_slack is None else fmt(self.tightest_slack),
            "tightest": None if self.tightest is None else {
                "pair": list(self.tightest[0]),
                "sequence": self.tightest[1].to_dict(),
            },
            "failures": len(self.failures),
        }


def lemma_lower_bound_audit(inst, K, C, max_pairs=2, exhaustive=False,
                            budget=DEFAULT_BUDGET):
    """Check ``d_X(x, y) <= K**2 * length + K*C`` for sequences from x to y.

    Default mode walks every T-pattern (u_1, v_1, ..., u_k, v_k) over f(S)
    and takes the shortest realization of each X-pair within it. Every
    sequence with that pattern is at least that long and the bound grows
    with length, so passing on the shortest one covers the whole pattern.
    ``exhaustive=True`` instead walks every literal sequence (tiny inputs).
    """
    K, C = check_constants(K, C)
    f, Sspace, T = instance_map(inst)
    cert = verify_certificate(f, Sspace, T, K, C, "pseudo", max_violations=20)
    if not cert.valid:
        raise CertificateRefused("lemma audit needs a valid pseudo certificate", cert)
    X = inst.X
    K2, KC = K * K, K * C
    failures = []
    tight = None
    tight_slack = None
    patterns = 0
    covered = 0

    def consider(x, y, seq):
        nonlocal tight, tight_slack
        slack = K2 * seq.length + KC - X.d(x, y)
        if tight_slack is None or slack < tight_slack:
            tight_slack, tight = slack, ((x, y), seq)
        if slack < 0:
            failures.append(((x, y), seq, slack))

    if exhaustive:
        for x in X.points:
            for y in X.points:
                for seq in iter_sequences(inst, x, y, max_pairs, budget):
                    patterns += 1
                    covered += 1
                    consider(x, y, seq)
        return LemmaAudit(K, C, not failures, patterns, covered, tight_slack, tight, failures)

    pre = {}
    for s in inst.S:
        pre.setdefault(f[s], []).append(s)
    image = [t for t in T.points if t in pre]
    n_patterns = sum(len(image) ** (2 * k) for k in range(1, max_pairs + 1))
    if n_patterns * len(X) ** 2 > budget:
        raise OracleBudgetExceeded(
            f"{n_patterns} patterns x {len(X) ** 2} endpoint pairs exceed the budget of {budget}"
        )

    def nearest(a_set, b_set):
        return min(((X.d(a, b), a, b) for a in a_set for b in b_set),
                   key=lambda e: (e[0], X.index[e[1]], X.index[e[2]]))

    for x in X.points:
        for y in X.points:
            patterns += 1
            covered += 1
            consider(x, y, AdmissibleSequence((("X", x, y),), X.d(x, y)))
    for k in range(1, max_pairs + 1):
        for pattern in itertools.product(image, repeat=2 * k):
            us, vs = pattern[0::2], pattern[1::2]
            middle = []
            mid_len = Fraction(0)
            count = 1
            for i in range(k):
                middle.append(("T", us[i], vs[i]))
                mid_len += T.d(us[i], vs[i])
                count *= len(pre[us[i]]) * len(pre[vs[i]])
                if i + 1 < k:
                    d, a, b = nearest(pre[vs[i]], pre[us[i + 1]])
                    middle.append(("X", a, b))
                    mid_len += d
            for x in X.points:
                d0, _, y1 = nearest([x], pre[us[0]])
                for y in X.points:
                    patterns += 1
                    covered += count
                    dk, xk, _ = nearest(pre[vs[-1]], [y])
                    pairs = (("X", x, y1), *middle, ("X", xk, y))
                    consider(x, y, AdmissibleSequence(pairs, d0 + mid_len + dk))
    return LemmaAudit(K, C, not failures, patterns, covered, tight_slack, tight, failures)


def oracle_compare(inst, surgered, max_pairs=None, budget=DEFAULT_BUDGET, points=None):
    """Compare the engine's class distances with the oracle minimum on every
    pair of X-points. Returns a list of mismatches ``(x, y, engine, oracle)``
    and the number of pairs compared."""
    pts = list(inst.X.points) if points is None else list(points)
    mismatches = []
    cache = {}
    n = 0
    for i, x in enumerate(pts):
        for y in pts[i:]:
            n += 1
            length, _ = min_sequence_length(inst, x, y, max_pairs, budget, cache)
            engine = surgered.dist_x(x, y)
            if length != engine:
                mismatches.append((x, y, engine, length))
    return mismatches, n
