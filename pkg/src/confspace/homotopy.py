"""Symbolic homotopy groups of W_{k,n}(M).

Answers are :class:`GroupExpr` trees.  Anything without a known closed form
stays a symbolic leaf (pi_p(V_{N,n}), pi_p(S^m), ...) rather than being
guessed.  Every answer carries a :class:`Provenance` naming the single rule
that produced it.

Rules, tried in this order:

    EMPTY    k exceeds the coordinate dimension, so the space is empty
    R6       projective, p = 1: the finite fundamental groups
    R5       projective, p >= 2: same as the sphere
    R1       k = 1: product of n copies of R^d - {0}, S^m or RP^m
    RETRACT  euclidean R^{m+1}: deformation retracts onto the sphere S^m
    R4       sphere, k = m+1, n = m+2: pi_p(V_{m+1,m+1})
    R3       sphere, k = m, n = m+1: pi_p(V_{m+1,m}) + pi_p(fiber)
    R2       sphere, k = n <= m+1: pi_p(V_{m+1,n})
    FADELL   k = 2 otherwise: only the fibration is known
    UNMATCHED  anything else: Unknown("no paper rule")
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

from .geometry import Ambient, SpaceSpec
from .errors import InputError


# -- expressions --------------------------------------------------------------------------

class GroupExpr:
    """Base class; subclasses are frozen dataclasses."""

    def render(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.render()


@dataclass(frozen=True)
class Trivial(GroupExpr):
    def render(self):
        return "1"


@dataclass(frozen=True)
class Z(GroupExpr):
    def render(self):
        return "Z"


@dataclass(frozen=True)
class Zmod(GroupExpr):
    q: int

    def render(self):
        return f"Z{self.q}"


@dataclass(frozen=True)
class Q8(GroupExpr):
    def render(self):
        return "Q8"


@dataclass(frozen=True)
class D8(GroupExpr):
    def render(self):
        return "D8"


@dataclass(frozen=True)
class Free(GroupExpr):
    rank: int

    def render(self):
        return f"Free({self.rank})"


@dataclass(frozen=True)
class DirectSum(GroupExpr):
    terms: tuple

    def render(self):
        return " + ".join(_wrap(t) for t in self.terms)


@dataclass(frozen=True)
class FreeProduct(GroupExpr):
    terms: tuple

    def render(self):
        return " ** ".join(_wrap(t) for t in self.terms)


@dataclass(frozen=True)
class CentralProduct(GroupExpr):
    a: GroupExpr
    b: GroupExpr

    def render(self):
        return f"{_wrap(self.a)}*{_wrap(self.b)}"


@dataclass(frozen=True)
class PiStiefel(GroupExpr):
    N: int
    n: int
    p: int

    def render(self):
        return f"pi_{self.p}(V_{{{self.N},{self.n}}})"


@dataclass(frozen=True)
class PiSphere(GroupExpr):
    m: int
    p: int

    def render(self):
        return f"pi_{self.p}(S^{self.m})"


@dataclass(frozen=True)
class PiProjective(GroupExpr):
    m: int
    p: int

    def render(self):
        return f"pi_{self.p}(RP^{self.m})"


@dataclass(frozen=True)
class PiSpaceMinusOrigin(GroupExpr):
    space: str
    p: int

    def render(self):
        return f"pi_{self.p}({self.space} - {{0}})"


@dataclass(frozen=True)
class Unknown(GroupExpr):
    reason: str

    def render(self):
        return f"Unknown({self.reason})"


def _wrap(e: GroupExpr) -> str:
    s = e.render()
    return f"({s})" if isinstance(e, (DirectSum, FreeProduct)) else s


def _sort_key(e: GroupExpr) -> tuple:
    if isinstance(e, (Free, Q8, D8, CentralProduct, FreeProduct)):
        bucket = 0
    elif isinstance(e, Z):
        bucket = 1
    elif isinstance(e, Zmod):
        return (2, e.q, "")
    else:
        bucket = 3
    return (bucket, 0, e.render())


def normalize(e: GroupExpr) -> GroupExpr:
    """Flatten sums and products, drop trivial terms, merge free factors, sort sums."""
    if isinstance(e, Free):
        return Trivial() if e.rank == 0 else Z() if e.rank == 1 else e
    if isinstance(e, Zmod) and e.q == 1:
        return Trivial()
    if isinstance(e, CentralProduct):
        return CentralProduct(normalize(e.a), normalize(e.b))
    if isinstance(e, DirectSum):
        terms = []
        for t in map(normalize, e.terms):
            if isinstance(t, DirectSum):
                terms.extend(t.terms)
            elif not isinstance(t, Trivial):
                terms.append(t)
        if not terms:
            return Trivial()
        if len(terms) == 1:
            return terms[0]
        return DirectSum(tuple(sorted(terms, key=_sort_key)))
    if isinstance(e, FreeProduct):
        rank, rest = 0, []
        for t in map(normalize, e.terms):
            parts = t.terms if isinstance(t, FreeProduct) else (t,)
            for u in parts:
                if isinstance(u, Z):
                    rank += 1
                elif isinstance(u, Free):
                    rank += u.rank
                elif not isinstance(u, Trivial):
                    rest.append(u)
        if rank:
            rest.insert(0, normalize(Free(rank)))
        if not rest:
            return Trivial()
        return rest[0] if len(rest) == 1 else FreeProduct(tuple(rest))
    return e


def direct_sum(*terms: GroupExpr) -> GroupExpr:
    return normalize(DirectSum(tuple(terms)))


def power(e: GroupExpr, n: int) -> GroupExpr:
    return direct_sum(*([e] * n))


def group_order(e: GroupExpr) -> int | None:
    """Order of a finite expression, None if infinite or symbolic."""
    e = normalize(e)
    if isinstance(e, Trivial):
        return 1
    if isinstance(e, Zmod):
        return e.q
    if isinstance(e, (Q8, D8)):
        return 8
    if isinstance(e, CentralProduct):
        a, b = group_order(e.a), group_order(e.b)
        return None if a is None or b is None else a * b // 2
    if isinstance(e, DirectSum):
        out = 1
        for t in e.terms:
            o = group_order(t)
            if o is None:
                return None
            out *= o
        return out
    return None


# -- provenance -------------------------------------------------------------------------------

class Confidence(str, enum.Enum):
    PAPER = "PAPER"
    DERIVED_BEYOND_PAPER = "DERIVED_BEYOND_PAPER"


@dataclass(frozen=True)
class Provenance:
    rule: str
    anchor: str
    confidence: Confidence
    via: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class Answer:
    expr: GroupExpr
    provenance: Provenance

    @property
    def text(self) -> str:
        return self.expr.render()

    def to_dict(self, query: dict | None = None) -> dict:
        d = {"answer": self.text, "rule": self.provenance.rule,
             "anchor": self.provenance.anchor,
             "confidence": self.provenance.confidence.value}
        if self.provenance.via:
            d["via"] = list(self.provenance.via)
        if query is not None:
            d["query"] = query
        return d


def _weakest(*cs: Confidence) -> Confidence:
    return Confidence.PAPER if all(c is Confidence.PAPER for c in cs) \
        else Confidence.DERIVED_BEYOND_PAPER


ANCHORS = {
    "R1": "pi_p W_{1,n}(M) = (pi_p(M-{0}))^n, p>=1",
    "R2": "pi_p(W_{n,n}(S^m)) = pi_p(V_{m+1,n}), n<=m+1, p>=1",
    "R3": "pi_p(W_{m,m+1}(S^m)) = pi_p(V_{m+1,m}) ⊕ pi_p(S^m - Q_{m-1,m}(S^m)_{b_m}), p>=1",
    "R4": "pi_p(W_{m+1,m+2}(S^m), b~_{m+1}) = pi_p(V_{m+1,m+1}, b_{m+1}), p>=1",
    "R5": "pi_p(W_{k,n}(RP^m)) = pi_p(W_{k,n}(S^m)), p>=2",
    "R6/abelian": "(Z_2)^n, k=n<=m-1",
    "R6/2": "Q_8, k=n=m=2",
    "R6/3": "Q_8⊕Z_2, k=n=m=3",
    "R6/4": "Q_8*_Z D_8, k=n=m=4",
    "RETRACT": "W_{k,n}(S^m) is a deformation retract of W_{k,n}(R^{m+1})",
    "FADELL": "k=2: Fadell fibration F_{n}(M) -> F_{n-1}(M), no groups computed",
    "EMPTY": "k > coordinate dimension: no k independent vectors exist",
    "UNMATCHED": "no paper rule",
    "V/pi1-corank1": "pi_1(V_{m+1,m}, b_m) = Z_2, m>=2",
    "V/pi1-simply": "pi_1(V_{m+1,n}) = 1, n<=m-1",
    "V/4,3": "pi_p(V_{4,3}) = Z_2 (p=1), 1 (p=2), pi_p(S^2)⊕pi_p(S^2) (p>=3)",
    "V/sphere": "V_{N,1} = S^{N-1}",
    "V/symbolic": "no table entry",
    "FIBER/3": "pi_1(S^3 - Q_{2,3}(S^3)_{b_3}) = *_7 Z; trivial for p>=2",
    "FIBER/m": "pi_1 = Free(2^m-1) from the dual graph; trivial for p>=2",
}


# -- table lookups -------------------------------------------------------------------------------

def stiefel_pi(N: int, n: int, p: int) -> Answer:
    """pi_p(V_{N,n}) from the known entries; otherwise a symbolic leaf."""
    if p < 1:
        raise InputError("p must be positive")
    P = Confidence.PAPER
    if (N, n) == (4, 3):
        if p == 1:
            expr = Zmod(2)
        elif p == 2:
            expr = Trivial()
        else:
            expr = direct_sum(PiSphere(2, p), PiSphere(2, p))
        return Answer(expr, Provenance("STIEFEL", ANCHORS["V/4,3"], P))
    if p == 1 and N >= 3 and n == N - 1:
        return Answer(Zmod(2), Provenance("STIEFEL", ANCHORS["V/pi1-corank1"], P))
    if p == 1 and 1 <= n <= N - 3:
        return Answer(Trivial(), Provenance("STIEFEL", ANCHORS["V/pi1-simply"], P))
    if n == 1:
        # V_{N,1} is the unit sphere S^{N-1}
        return Answer(PiSphere(N - 1, p), Provenance("STIEFEL", ANCHORS["V/sphere"], P))
    return Answer(PiStiefel(N, n, p), Provenance("STIEFEL", ANCHORS["V/symbolic"], P))


@functools.lru_cache(maxsize=None)
def fiber_pi1_rank(m: int) -> int:
    """Rank of the free group pi_1(S^m - Q_{m-1,m}(S^m)_{b_m}), read off the dual graph."""
    from .arrangements import dual_graph, free_rank, standard_q

    if m < 2:
        raise InputError("fiber_pi1_rank needs m >= 2")
    return free_rank(dual_graph(standard_q(m)))


def fiber_pi(m: int, p: int) -> Answer:
    conf = Confidence.PAPER if m == 3 else Confidence.DERIVED_BEYOND_PAPER
    anchor = ANCHORS["FIBER/3"] if m == 3 else ANCHORS["FIBER/m"]
    expr = normalize(Free(fiber_pi1_rank(m))) if p == 1 else Trivial()
    return Answer(expr, Provenance("FIBER", anchor, conf))


# -- the calculator ---------------------------------------------------------------------------------

def _answer(expr: GroupExpr, rule: str, anchor_key: str, *parts: Answer,
            confidence: Confidence = Confidence.PAPER) -> Answer:
    conf = _weakest(confidence, *(a.provenance.confidence for a in parts))
    via = tuple(a.provenance.rule for a in parts)
    return Answer(normalize(expr), Provenance(rule, ANCHORS[anchor_key], conf, via))


def _space_name(spec: SpaceSpec) -> str:
    return {Ambient.EUCLIDEAN: "R^", Ambient.SPHERE: "S^",
            Ambient.PROJECTIVE: "RP^"}[spec.ambient] + str(spec.dim)


def homotopy_group(spec: SpaceSpec, p: int) -> Answer:
    """pi_p(W_{k,n}(M)) by the first matching rule (see the module docstring)."""
    if p < 1:
        raise InputError("p must be positive")
    k, n, m = spec.k, spec.n, spec.dim
    amb = spec.ambient

    if not spec.satisfiable:
        return _answer(Unknown("empty space"), "EMPTY", "EMPTY",
                       confidence=Confidence.DERIVED_BEYOND_PAPER)

    if amb is Ambient.PROJECTIVE:
        if p == 1:
            if k == n and n <= m - 1:
                return _answer(power(Zmod(2), n), "R6", "R6/abelian")
            if k == n == m == 2:
                return _answer(Q8(), "R6", "R6/2")
            if k == n == m == 3:
                return _answer(direct_sum(Q8(), Zmod(2)), "R6", "R6/3")
            if k == n == m == 4:
                return _answer(CentralProduct(Q8(), D8()), "R6", "R6/4")
        else:
            inner = homotopy_group(SpaceSpec.sphere(m, k, n), p)
            return _answer(inner.expr, "R5", "R5", inner)

    if k == 1:
        # S^m and RP^m never contain the zero vector
        if amb is Ambient.SPHERE:
            leaf = PiSphere(m, p)
        elif amb is Ambient.PROJECTIVE:
            leaf = PiProjective(m, p)
        else:
            leaf = PiSpaceMinusOrigin(_space_name(spec), p)
        return _answer(power(leaf, n), "R1", "R1")

    if amb is Ambient.EUCLIDEAN:
        if m < 2:
            return _answer(Unknown("no paper rule"), "UNMATCHED", "UNMATCHED",
                           confidence=Confidence.DERIVED_BEYOND_PAPER)
        inner = homotopy_group(SpaceSpec.sphere(m - 1, k, n), p)
        return _answer(inner.expr, "RETRACT", "RETRACT", inner)

    if amb is Ambient.SPHERE:
        if k == m + 1 and n == m + 2:
            v = stiefel_pi(m + 1, m + 1, p)
            return _answer(v.expr, "R4", "R4", v)
        if k == m and n == m + 1:
            if m < 2:
                return _answer(Unknown("R3 needs m >= 2"), "R3", "R3",
                               confidence=Confidence.DERIVED_BEYOND_PAPER)
            v, f = stiefel_pi(m + 1, m, p), fiber_pi(m, p)
            return _answer(DirectSum((v.expr, f.expr)), "R3", "R3", v, f)
        if k == n <= m + 1:
            v = stiefel_pi(m + 1, n, p)
            return _answer(v.expr, "R2", "R2", v)

    if k == 2:
        return _answer(Unknown("see Fadell's fibration"), "FADELL", "FADELL",
                       confidence=Confidence.DERIVED_BEYOND_PAPER)
    return _answer(Unknown("no paper rule"), "UNMATCHED", "UNMATCHED",
                   confidence=Confidence.DERIVED_BEYOND_PAPER)


def query(ambient: str, dim: int, k: int, n: int, p: int) -> dict:
    """JSON-ready answer including the query echo."""
    spec = SpaceSpec.normalized(Ambient.parse(ambient), dim, k, n)
    q = dict(spec.to_dict(), p=p)
    return homotopy_group(spec, p).to_dict(q)
