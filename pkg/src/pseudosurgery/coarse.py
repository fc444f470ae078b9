"""Pseudo- and quasi-isometry certificates for maps between finite spaces."""

from dataclasses import dataclass, field
from fractions import Fraction
import math
from math import lcm

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .metric import induced_subspace
from .rational import fmt, to_rational
from .validation import check_constants

KINDS = ("pseudo", "quasi")


class CertificateRefused(ValueError):
    """Raised by audits whose input constants are not a valid certificate."""

    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate


@dataclass
class Violation:
    pair: tuple
    side: str
    slack: Fraction

    def to_dict(self):
        return {"pair": list(self.pair), "side": self.side, "slack": fmt(self.slack)}


@dataclass
class CoarseCertificate:
    """A (K, C) pair with its exhaustive verification record.

    ``worst_slack`` holds, per side, the smallest margin ``bound - value``
    seen; negative margins are violations.
    """

    kind: str
    K: Fraction
    C: Fraction
    valid: bool
    violations: list = field(default_factory=list)
    worst_slack: dict = field(default_factory=dict)
    pairs_checked: int = 0

    def to_dict(self):
        return {
            "kind": self.kind,
            "K": fmt(self.K),
            "C": fmt(self.C),
            "valid": self.valid,
            "violations": [v.to_dict() for v in self.violations],
            "worst_slack": {k: (None if v is None else fmt(v))
                            for k, v in self.worst_slack.items()},
        }


class _Pairs:
    """Distances over all S-pairs, scaled to a shared integer unit."""

    def __init__(self, f, S, T, points=None):
        if points is None:
            pts = list(S.points)
        else:
            keep = set(points)
            pts = [p for p in S.points if p in keep]
        self.points = pts
        n = len(pts)
        self.i, self.j = np.triu_indices(n, 1)
        si = [S.index[p] for p in pts]
        ti = [T.index[f[p]] for p in pts]
        ds = [S.rows[a][b] for a, b in zip((si[k] for k in self.i), (si[k] for k in self.j))]
        tset = sorted(set(ti))
        tpair = {(a, b): T.rows[a][b] for a in tset for b in tset}
        dt = [tpair[ti[a], ti[b]] for a, b in zip(self.i, self.j)]
        den = 1
        for d in {x.denominator for x in ds} | {x.denominator for x in tpair.values()}:
            den = lcm(den, d)
        self.den = den
        ds = [x.numerator * (den // x.denominator) for x in ds]
        dt = [x.numerator * (den // x.denominator) for x in dt]
        big = max([0] + ds + dt)
        dtype = np.int64 if big < 2**40 else object
        self.ds = np.array(ds, dtype=dtype)
        self.dt = np.array(dt, dtype=dtype)

    def __len__(self):
        return len(self.ds)

    def pair(self, k):
        return self.points[self.i[k]], self.points[self.j[k]]

    def value(self, arr, k, scale=1):
        return Fraction(int(arr[k]), self.den * scale)


def _scan(f, S, T, points):
    if len(S) == 0:
        raise ValueError("S is empty")
    return _Pairs(f, S, T, points)


def lipschitz_constant(f, S, T, points=None):
    """Largest ratio d_T(f x, f y) / d_S(x, y) over distinct pairs; exact."""
    P = _scan(f, S, T, points)
    if len(P) == 0:
        return Fraction(0)
    mask = P.ds > 0
    if not mask.any():
        return Fraction(0)
    idx = np.nonzero(mask)[0]
    ratios = P.dt[idx].astype(float) / P.ds[idx].astype(float)
    top = ratios.max()
    cands = idx[ratios >= top * (1 - 1e-9)]
    return max(Fraction(int(P.dt[k]), int(P.ds[k])) for k in cands)


def lipschitz_witness(f, S, T, points=None):
    """The pair attaining :func:`lipschitz_constant` (first in scan order)."""
    P = _scan(f, S, T, points)
    L = lipschitz_constant(f, S, T, points)
    for k in range(len(P)):
        if P.ds[k] > 0 and Fraction(int(P.dt[k]), int(P.ds[k])) == L:
            return P.pair(k)
    return None


def coarse_surjectivity_constant(f, S, T):
    """max over t in T of the distance from t to the image of f."""
    image = sorted({T.index[f[s]] for s in S.points})
    worst = Fraction(0)
    for row in T.rows:
        worst = max(worst, min(row[k] for k in image))
    return worst


def min_additive_for(f, S, T, K, kind="pseudo", points=None):
    """Smallest C for which (K, C) certifies f, or ``None`` if no C works.

    ``None`` only happens for the pseudo kind with K below the Lipschitz
    constant, since the pseudo upper bound carries no additive slack.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    K = to_rational(K)
    if K < 1:
        raise ValueError("K must be at least 1")
    P = _scan(f, S, T, points)
    p, q = K.numerator, K.denominator
    C = coarse_surjectivity_constant(f, S, T)
    if len(P):
        # d_S/K - d_T = (q*d_S - p*d_T) / (p*den)
        low = q * P.ds - p * P.dt
        C = max(C, Fraction(int(low.max()), p * P.den))
        # d_T - K*d_S = (q*d_T - p*d_S) / (q*den)
        up = q * P.dt - p * P.ds
        worst_up = Fraction(int(up.max()), q * P.den)
        if kind == "pseudo":
            if worst_up > 0:
                return None
        else:
            C = max(C, worst_up)
    return max(C, Fraction(0))


def verify_certificate(f, S, T, K, C, kind="pseudo", points=None, max_violations=None):
    """Check both distortion inequalities on every pair, plus coarse surjectivity.

    ``points`` restricts the pair scan (interior pairs of a truncated ball);
    coarse surjectivity always uses all of S and T.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    K, C = check_constants(K, C)
    P = _scan(f, S, T, points)
    p, q = K.numerator, K.denominator
    violations = []
    worst = {"upper": None, "lower": None, "surjectivity": None}
    if len(P):
        # lower margin: d_T - d_S/K + C = (p*d_T - q*d_S + p*C*den) / (p*den)
        cnum = C * p * P.den
        low = p * P.dt - q * P.ds
        # upper margin: K*d_S (+C) - d_T = (p*d_S - q*d_T (+ q*C*den)) / (q*den)
        up = p * P.ds - q * P.dt
        cup = C * q * P.den if kind == "quasi" else Fraction(0)
        kl = int(np.argmin(low))
        ku = int(np.argmin(up))
        worst["lower"] = (Fraction(int(low[kl])) + cnum) / (p * P.den)
        worst["upper"] = (Fraction(int(up[ku])) + cup) / (q * P.den)
        for side, arr, off, scale in (("upper", up, cup, q), ("lower", low, cnum, p)):
            # arr + off < 0 with off rational: compare exactly on the candidates
            bad = np.nonzero(arr < math.ceil(-off) + 1)[0]
            for k in bad:
                margin = (Fraction(int(arr[k])) + off) / (scale * P.den)
                if margin < 0:
                    violations.append(Violation(P.pair(k), side, margin))
    image = sorted({T.index[f[s]] for s in S.points})
    for t, row in zip(T.points, T.rows):
        gap = C - min(row[k] for k in image)
        if worst["surjectivity"] is None or gap < worst["surjectivity"]:
            worst["surjectivity"] = gap
        if gap < 0:
            violations.append(Violation((t,), "surjectivity", gap))
    violations.sort(key=lambda v: (v.slack, v.side, v.pair))
    if max_violations is not None:
        violations = violations[:max_violations]
    return CoarseCertificate(kind, K, C, not violations, violations, worst, len(P))


def certify(f, S, T, kind="pseudo", points=None):
    """Lexicographically minimal certificate: smallest feasible K, then C.

    Pseudo kind: K = max(1, Lipschitz constant) is the least feasible
    multiplicative constant. Quasi kind: every K >= 1 admits a finite C, so
    the lexicographic optimum always sits at K = 1.
    """
    if kind == "pseudo":
        K = max(Fraction(1), lipschitz_constant(f, S, T, points))
    elif kind == "quasi":
        K = Fraction(1)
    else:
        raise ValueError(f"kind must be one of {KINDS}")
    C = min_additive_for(f, S, T, K, kind, points)
    return verify_certificate(f, S, T, K, C, kind, points)


def frontier(f, S, T, Ks, kind="pseudo", points=None):
    """``[(K, C or None), ...]`` for a caller-supplied grid of K values."""
    return [(to_rational(K), min_additive_for(f, S, T, K, kind, points)) for K in Ks]


def instance_map(inst):
    """(f, S as a metric space, T) for a surgery instance."""
    return inst.f, induced_subspace(inst.X, inst.S), inst.T


# -- theorem audit ---------------------------------------------------------


@dataclass
class TheoremAudit:
    """Outcome of checking the conclusions about F for one (K, C).

    Margins are ``bound - value``; all must be nonnegative to pass.
    """

    K: Fraction
    C: Fraction
    passed: bool
    lower_constants: tuple
    worst_lower: Fraction
    worst_upper: Fraction
    worst_surjectivity: Fraction
    same_image_bound: Fraction
    worst_same_image: Fraction
    failures: list
    pairs_checked: int
    tightest_lower_pair: tuple = None

    def to_dict(self):
        return {
            "K": fmt(self.K),
            "C": fmt(self.C),
            "passed": self.passed,
            "lower_bound": {
                "multiplier": fmt(self.lower_constants[0]),
                "additive": fmt(self.lower_constants[1]),
            },
            "worst_slack": {
                "lower": fmt(self.worst_lower),
                "upper": fmt(self.worst_upper),
                "surjectivity": (None if self.worst_surjectivity is None
                                 else fmt(self.worst_surjectivity)),
                "same_image": (None if self.worst_same_image is None
                               else fmt(self.worst_same_image)),
            },
            "tightest_lower_pair": (None if self.tightest_lower_pair is None
                                    else list(self.tightest_lower_pair)),
            "pairs_checked": self.pairs_checked,
            "failures": [{"pair": list(p), "side": s, "slack": fmt(m)}
                         for p, s, m in self.failures],
        }


def theorem_audit(inst, surgered, K, C, points=None, cert_points=None):
    """Check, for every pair x, y of X (or of ``points``):

    * ``d_X/K**2 - 7C/K <= d_hat(F x, F y)``
    * ``d_hat(F x, F y) <= d_X``
    * ``d_X <= 3KC`` whenever ``F x == F y``

    and that every class without an X-point is within C of the image of F.
    Refuses (raises :class:`CertificateRefused`) if (K, C) is not a valid
    pseudo certificate for f.
    """
    K, C = check_constants(K, C)
    f, S, T = instance_map(inst)
    cert = verify_certificate(f, S, T, K, C, "pseudo", cert_points, max_violations=20)
    if not cert.valid:
        raise CertificateRefused(
            f"(K, C) = ({fmt(K)}, {fmt(C)}) is not a pseudo-isometry certificate for f",
            cert,
        )
    X = inst.X
    pts = list(X.points) if points is None else [p for p in X.points if p in set(points)]
    mult = 1 / (K * K)
    add = 7 * C / K
    bound3 = 3 * K * C
    F = surgered.F
    D = surgered.space
    failures = []
    worst_lower = worst_upper = None
    worst_same = None
    tight = None
    n = 0
    for a_i, x in enumerate(pts):
        xr = X.row(x)
        dr = D.row(F[x])
        for y in pts[a_i + 1:]:
            n += 1
            dx = xr[X.index[y]]
            dh = dr[D.index[F[y]]]
            lo = dh - (dx * mult - add)
            up = dx - dh
            if worst_lower is None or lo < worst_lower:
                worst_lower, tight = lo, (x, y)
            if worst_upper is None or up < worst_upper:
                worst_upper = up
            if lo < 0:
                failures.append(((x, y), "lower", lo))
            if up < 0:
                failures.append(((x, y), "upper", up))
            if F[x] == F[y]:
                m = bound3 - dx
                if worst_same is None or m < worst_same:
                    worst_same = m
                if m < 0:
                    failures.append(((x, y), "same_image", m))
    image = {F[p] for p in X.points}
    worst_surj = None
    for c in D.points:
        if c in image:
            continue
        row = D.row(c)
        gap = C - min(row[D.index[k]] for k in image)
        if worst_surj is None or gap < worst_surj:
            worst_surj = gap
        if gap < 0:
            failures.append(((c,), "surjectivity", gap))
    zero = Fraction(0)
    return TheoremAudit(
        K, C, not failures, (mult, add),
        zero if worst_lower is None else worst_lower,
        zero if worst_upper is None else worst_upper,
        worst_surj, bound3, worst_same, failures, n, tight,
    )


# -- estimator -------------------------------------------------------------


class CoarseCertifier(BaseEstimator):
    """Certify the gluing map of a surgery instance.

    With ``K`` and ``C`` unset, ``fit`` finds the lexicographically minimal
    certificate; with both set it verifies that pair.
    """

    def __init__(self, kind="pseudo", K=None, C=None, points=None):
        self.kind = kind
        self.K = K
        self.C = C
        self.points = points

    def fit(self, instance, y=None):
        from .validation import check_instance
        inst = check_instance(instance)
        f, S, T = instance_map(inst)
        if self.K is None and self.C is None:
            cert = certify(f, S, T, self.kind, self.points)
        else:
            K = self.K
            if K is None:
                K = certify(f, S, T, self.kind, self.points).K
            C = self.C
            if C is None:
                C = min_additive_for(f, S, T, K, self.kind, self.points)
                # infeasible K: verify at C = 0 so the violations are reported
                C = 0 if C is None else C
            cert = verify_certificate(f, S, T, K, C, self.kind, self.points)
        self.certificate_ = cert
        self.lipschitz_ = lipschitz_constant(f, S, T, self.points)
        self.surjectivity_ = coarse_surjectivity_constant(f, S, T)
        return self

    @property
    def valid_(self):
        check_is_fitted(self, "certificate_")
        return self.certificate_.valid
