"""Finite groups as multiplication tables, and the spin groups pi_1(W_{m,m}(RP^m)).

The fundamental group of W_{m,m}(RP^m) is realized as the preimage, in the
spin double cover of SO(m+1), of the rotations diag(+-1, ..., +-1) with an
even number of sign changes: the signed even blades +-e_S, S an even subset
of {1, ..., m+1}.  A sign flip of the first m frame vectors corresponds to
the diagonal rotation that also flips the last axis when needed to keep the
determinant +1.
"""

from __future__ import annotations

import enum
import itertools
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Sequence

import numpy as np
from sympy.combinatorics.fp_groups import FpGroup
from sympy.combinatorics.free_groups import free_group

from .clifford import CliffordElement
from .errors import InputError


@dataclass(eq=False)
class FiniteGroup:
    elements: list
    table: np.ndarray
    origin: dict = field(default_factory=dict)

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.intp)
        n = len(self.elements)
        if self.table.shape != (n, n):
            raise InputError("table shape does not match the element list")
        self._index = {e: i for i, e in enumerate(self.elements)}
        self._validate()

    def _validate(self):
        t, n = self.table, self.order
        if t.min() < 0 or t.max() >= n:
            raise InputError("table entries out of range")
        ids = [i for i in range(n) if np.array_equal(t[i], np.arange(n))
               and np.array_equal(t[:, i], np.arange(n))]
        if len(ids) != 1:
            raise InputError("no two-sided identity")
        self.identity = ids[0]
        for row in t:
            if len(set(row.tolist())) != n:
                raise InputError("table is not a Latin square")
        inv = np.argmax(t == self.identity, axis=1)
        if not np.all(t[np.arange(n), inv] == self.identity) or not np.all(
                t[inv, np.arange(n)] == self.identity):
            raise InputError("missing inverses")
        self._inv = inv
        if n <= 64:
            a = np.arange(n)
            lhs = t[t[a[:, None], a[None, :]][:, :, None], a[None, None, :]]
            rhs = t[a[:, None, None], t[a[:, None], a[None, :]][None, :, :]]
            if not np.array_equal(lhs, rhs):
                raise InputError("table is not associative")

    # -- construction ----------------------------------------------------------

    @classmethod
    def from_generators(cls, gens: Sequence[Any], mul: Callable[[Any, Any], Any],
                        key: Callable[[Any], Hashable] = lambda x: x,
                        origin: dict | None = None, limit: int = 4096) -> "FiniteGroup":
        """Closure of the generators under ``mul``; elements keyed by ``key``."""
        if not gens:
            raise InputError("need at least one generator")
        elems: list = []
        seen: dict = {}
        queue = deque()
        for g in gens:
            if key(g) not in seen:
                seen[key(g)] = len(elems)
                elems.append(g)
                queue.append(g)
        while queue:
            x = queue.popleft()
            for g in gens:
                y = mul(x, g)
                if key(y) not in seen:
                    if len(elems) >= limit:
                        raise InputError("generated group exceeds the size limit")
                    seen[key(y)] = len(elems)
                    elems.append(y)
                    queue.append(y)
        table = [[seen[key(mul(a, b))] for b in elems] for a in elems]
        return cls([key(e) for e in elems], np.array(table), origin or {})

    # -- basic access ------------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, element) -> int:
        if isinstance(element, (int, np.integer)) and not isinstance(element, bool) \
                and element not in self._index:
            return int(element)
        try:
            return self._index[element]
        except KeyError:
            raise InputError(f"{element!r} is not an element of this group") from None

    def label(self, i: int) -> str:
        e = self.elements[i]
        return e.label() if hasattr(e, "label") else str(e)

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inverse(self, a: int) -> int:
        return int(self._inv[a])

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inverse(a), -k
        r = self.identity
        for _ in range(k):
            r = self.mul(r, a)
        return r

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def subgroup(self, gens: Sequence[int]) -> set[int]:
        sub = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in sub:
                        sub.add(y)
                        nxt.append(y)
            frontier = nxt
        return sub

    # -- invariants ----------------------------------------------------------------

    def center(self) -> list[int]:
        t = self.table
        return [i for i in range(self.order) if np.array_equal(t[i], t[:, i])]

    def commutator(self, a: int, b: int) -> int:
        return self.mul(self.mul(self.inverse(a), self.inverse(b)), self.mul(a, b))

    def commutator_subgroup(self) -> set[int]:
        comms = {self.commutator(a, b) for a in range(self.order) for b in range(self.order)}
        return self.subgroup(sorted(comms))

    def exponent(self) -> int:
        from math import lcm
        out = 1
        for a in range(self.order):
            out = lcm(out, self.element_order(a))
        return out

    def invariants(self) -> dict:
        stats = order_statistics(self)
        derived = len(self.commutator_subgroup())
        return {
            "order": self.order,
            "order_statistics": {str(k): v for k, v in stats.items()},
            "center_order": len(self.center()),
            "commutator_order": derived,
            "abelianization_order": self.order // derived,
            "exponent": self.exponent(),
            "abelian": derived == 1,
        }

    def generators(self) -> list[int]:
        """A small generating set, chosen greedily by decreasing element order."""
        by_order = sorted(range(self.order), key=lambda a: (-self.element_order(a), a))
        gens: list[int] = []
        sub = {self.identity}
        for a in by_order:
            if a not in sub:
                gens.append(a)
                sub = self.subgroup(gens)
                if len(sub) == self.order:
                    break
        return gens

    def permuted(self, perm: Sequence[int]) -> "FiniteGroup":
        """The same group with element i renamed to position perm[i]."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        elems = [self.elements[inv[j]] for j in range(self.order)]
        table = perm[self.table[inv[:, None], inv[None, :]]]
        return FiniteGroup(elems, table, dict(self.origin))

    # -- serialization ----------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"labels": [self.label(i) for i in range(self.order)],
                "table": self.table.tolist(), "origin": self.origin}

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteGroup":
        return cls(list(d["labels"]), np.array(d["table"]), dict(d.get("origin", {})))


def order_statistics(g: FiniteGroup) -> dict[int, int]:
    """Number of elements of each order, keyed by order."""
    c = Counter(g.element_order(a) for a in range(g.order))
    return dict(sorted(c.items()))


# -- the spin groups ----------------------------------------------------------------

def even_subsets(n: int) -> list[frozenset[int]]:
    return [frozenset(s) for r in range(0, n + 1, 2)
            for s in itertools.combinations(range(1, n + 1), r)]


def pi1_extension_group(m: int) -> FiniteGroup:
    """{+-e_S : S even subset of {1..m+1}} under Clifford multiplication; order 2^{m+1}."""
    if not 2 <= m <= 8:
        raise InputError("pi1_extension_group supports 2 <= m <= 8")
    elems = [CliffordElement(s, S) for S in even_subsets(m + 1) for s in (1, -1)]
    index = {e: i for i, e in enumerate(elems)}
    table = np.array([[index[a * b] for b in elems] for a in elems])
    origin = {"construction": "signed even Clifford blades", "m": m,
              "confidence": "PAPER" if m <= 4 else "DERIVED_BEYOND_PAPER"}
    return FiniteGroup(elems, table, origin)


def sign_rotation(signs: Sequence[int]) -> tuple[int, ...]:
    """Deck transformation (s_1..s_m) as the rotation diag(s_1, ..., s_m, s_1...s_m)."""
    prod = 1
    for s in signs:
        prod *= s
    return tuple(signs) + (prod,)


def rotation_of(e: CliffordElement, n: int) -> tuple[int, ...]:
    """Diagonal of the rotation v -> e v e~ for a signed blade: -1 exactly on S."""
    return tuple(-1 if i in e.subset else 1 for i in range(1, n + 1))


# -- catalogue ------------------------------------------------------------------------

class GroupKind(str, enum.Enum):
    ELEMENTARY_ABELIAN = "Z2^k"
    Q8 = "Q8"
    D8 = "D8"
    Q8xZ2 = "Q8xZ2"
    D8xZ2 = "D8xZ2"
    Z4Z2Z2_CENTRAL = "Z4Z2Z2_central"
    Q8starD8 = "Q8starD8"
    UNKNOWN = "UNKNOWN"


_LABELS = {
    GroupKind.Q8: "Q8",
    GroupKind.D8: "D8",
    GroupKind.Q8xZ2: "Q8 + Z2",
    GroupKind.D8xZ2: "D8 + Z2",
    GroupKind.Z4Z2Z2_CENTRAL: "Z4*D8",
    GroupKind.Q8starD8: "Q8*D8",
    GroupKind.UNKNOWN: "UNKNOWN",
}

PRESENTATIONS = {
    GroupKind.Q8: "<a,b | a^4=1, b^2=a^2, b^-1 a b=a^3>",
    GroupKind.D8: "<a,b | a^4=b^2=1, b^-1 a b=a^3>",
    GroupKind.Z4Z2Z2_CENTRAL: "<a,b,c | a^4=b^2=c^2=1, [b,c]=a^2, [a,b]=[a,c]=1>",
}


@dataclass(frozen=True)
class GroupName:
    kind: GroupKind
    rank: int | None = None
    invariants: dict | None = field(default=None, compare=False)

    @property
    def label(self) -> str:
        if self.kind is GroupKind.ELEMENTARY_ABELIAN:
            return f"Z2^{self.rank}"
        return _LABELS[self.kind]

    def __str__(self):
        return self.label


def _complex_key(m: np.ndarray) -> tuple:
    return tuple(complex(round(z.real), round(z.imag)) for z in np.asarray(m).ravel())


def _from_matrices(gens: list[np.ndarray], name: str) -> FiniteGroup:
    return FiniteGroup.from_generators(
        [np.asarray(g, dtype=complex) for g in gens], lambda a, b: a @ b,
        key=_complex_key, origin={"construction": name})


def elementary_abelian(k: int) -> FiniteGroup:
    elems = list(itertools.product((0, 1), repeat=k))
    index = {e: i for i, e in enumerate(elems)}
    table = [[index[tuple((x + y) % 2 for x, y in zip(a, b))] for b in elems] for a in elems]
    return FiniteGroup(elems, np.array(table), {"construction": f"Z2^{k}"})


def quaternion_group() -> FiniteGroup:
    i = np.array([[1j, 0], [0, -1j]])
    j = np.array([[0, 1], [-1, 0]])
    return _from_matrices([i, j], "Q8")


def dihedral_group() -> FiniteGroup:
    # symmetries of a square acting on its vertices 0..3
    r, s = (1, 2, 3, 0), (0, 3, 2, 1)
    g = FiniteGroup.from_generators([r, s], lambda a, b: tuple(a[b[x]] for x in range(4)),
                                    origin={"construction": "D8"})
    return g


def pauli_group() -> FiniteGroup:
    a = 1j * np.eye(2)
    b = np.array([[0, 1], [1, 0]])
    c = np.array([[1, 0], [0, -1]])
    return _from_matrices([a, b, c], "Z4Z2Z2_central")


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    pairs = [(a, b) for a in range(g.order) for b in range(h.order)]
    index = {p: i for i, p in enumerate(pairs)}
    table = [[index[(g.mul(a, c), h.mul(b, d))] for (c, d) in pairs] for (a, b) in pairs]
    elems = [(g.elements[a], h.elements[b]) for a, b in pairs]
    return FiniteGroup(elems, np.array(table),
                       {"construction": f"{g.origin.get('construction')} x {h.origin.get('construction')}"})


def quotient(g: FiniteGroup, normal: set[int]) -> FiniteGroup:
    """G/N for a normal subgroup N given by element indices."""
    cosets: list[frozenset[int]] = []
    which: dict[int, int] = {}
    for a in range(g.order):
        if a in which:
            continue
        coset = frozenset(g.mul(a, x) for x in normal)
        for x in coset:
            which[x] = len(cosets)
        cosets.append(coset)
    reps = [min(c) for c in cosets]
    table = [[which[g.mul(a, b)] for b in reps] for a in reps]
    return FiniteGroup([tuple(sorted(c)) for c in cosets], np.array(table),
                       {"construction": "quotient"})


def central_product_q8_d8() -> FiniteGroup:
    """(Q8 x D8) / <(-1, r^2)>."""
    q, d = quaternion_group(), dihedral_group()
    prod = direct_product(q, d)
    zq = next(i for i in q.center() if i != q.identity)
    zd = next(i for i in d.center() if i != d.identity)
    z = zq * d.order + zd
    g = quotient(prod, {prod.identity, z})
    g.origin = {"construction": "Q8*D8"}
    return g


def catalogue() -> list[tuple[GroupName, Callable[[], FiniteGroup]]]:
    entries: list[tuple[GroupName, Callable[[], FiniteGroup]]] = [
        (GroupName(GroupKind.ELEMENTARY_ABELIAN, k), (lambda k=k: elementary_abelian(k)))
        for k in range(1, 7)
    ]
    entries += [
        (GroupName(GroupKind.Q8), quaternion_group),
        (GroupName(GroupKind.D8), dihedral_group),
        (GroupName(GroupKind.Q8xZ2), lambda: direct_product(quaternion_group(), elementary_abelian(1))),
        (GroupName(GroupKind.D8xZ2), lambda: direct_product(dihedral_group(), elementary_abelian(1))),
        (GroupName(GroupKind.Z4Z2Z2_CENTRAL), pauli_group),
        (GroupName(GroupKind.Q8starD8), central_product_q8_d8),
    ]
    return entries


# -- isomorphism -------------------------------------------------------------------------

def find_isomorphism(g: FiniteGroup, h: FiniteGroup) -> dict[int, int] | None:
    """An isomorphism G -> H as an index map, or None.

    Backtracks over images of a generating set of G, restricted to elements of
    H of the same order; each partial assignment is extended along the
    subgroup it generates and rejected at the first clash.
    """
    if g.order != h.order or order_statistics(g) != order_statistics(h):
        return None
    gens = g.generators()
    h_orders = [h.element_order(b) for b in range(h.order)]
    candidates = [[b for b in range(h.order) if h_orders[b] == g.element_order(a)] for a in gens]

    def extend(images: list[int]) -> dict[int, int] | None:
        phi = {g.identity: h.identity}
        used = {h.identity}
        queue = deque([g.identity])
        while queue:
            x = queue.popleft()
            for gi, hi in zip(gens, images):
                y, img = g.mul(x, gi), h.mul(phi[x], hi)
                if y in phi:
                    if phi[y] != img:
                        return None
                elif img in used:
                    return None
                else:
                    phi[y] = img
                    used.add(img)
                    queue.append(y)
        return phi

    def search(images: list[int]) -> dict[int, int] | None:
        if len(images) == len(gens):
            phi = extend(images)
            return phi if phi is not None and len(phi) == g.order else None
        for b in candidates[len(images)]:
            if extend(images + [b]) is not None:
                found = search(images + [b])
                if found is not None:
                    return found
        return None

    return search([])


def is_isomorphism(g: FiniteGroup, h: FiniteGroup, phi: dict[int, int]) -> bool:
    if len(phi) != g.order or len(set(phi.values())) != h.order:
        return False
    return all(phi[g.mul(a, b)] == h.mul(phi[a], phi[b])
               for a in range(g.order) for b in range(g.order))


def identify(g: FiniteGroup) -> GroupName:
    """Name G from the catalogue: filter by invariants, confirm by explicit isomorphism."""
    if g.order > 64:
        raise InputError("identify supports groups of order at most 64")
    inv = g.invariants()
    for name, build in catalogue():
        if name.kind is GroupKind.ELEMENTARY_ABELIAN and 2 ** name.rank != g.order:
            continue
        h = build()
        if h.order != g.order:
            continue
        h_inv = h.invariants()
        if any(h_inv[k] != inv[k] for k in ("order_statistics", "center_order",
                                             "commutator_order", "exponent")):
            continue
        if find_isomorphism(g, h) is not None:
            return GroupName(name.kind, name.rank, inv)
    return GroupName(GroupKind.UNKNOWN, None, inv)


# -- presentations -------------------------------------------------------------------------

_TOKEN = re.compile(r"\[\s*(\w+)\s*,\s*(\w+)\s*\]|(\w+)(?:\^\s*\(?\s*(-?\d+)\s*\)?)?")


def parse_word(text: str) -> list[tuple[str, int]]:
    """'b2^-1 b1 b2', '[b1,b3]', 'a^4' -> list of (generator, exponent); '1' is empty."""
    word: list[tuple[str, int]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        if text[pos] in " *.":
            pos += 1
            continue
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise InputError(f"cannot parse word {text!r} at {text[pos:]!r}")
        if mt.group(1):
            a, b = mt.group(1), mt.group(2)
            word += [(a, -1), (b, -1), (a, 1), (b, 1)]
        elif mt.group(3) != "1":
            word.append((mt.group(3), int(mt.group(4)) if mt.group(4) else 1))
        pos = mt.end()
    return word


def parse_relation(text: str) -> list[tuple[str, int]]:
    """A relator; 'u = v = w' becomes u v^-1 (and v w^-1 handled by the caller)."""
    parts = [p for p in text.split("=")]
    if len(parts) == 1:
        return parse_word(parts[0])
    if len(parts) != 2:
        raise InputError("chained equalities must be split into separate relations")
    lhs, rhs = parse_word(parts[0]), parse_word(parts[1])
    return lhs + [(gname, -e) for gname, e in reversed(rhs)]


def split_relations(relations: Sequence[str]) -> list[str]:
    out = []
    for r in relations:
        parts = r.split("=")
        if len(parts) <= 2:
            out.append(r)
        else:
            out += [f"{parts[i]}={parts[i + 1]}" for i in range(len(parts) - 1)]
    return out


def evaluate_word(g: FiniteGroup, images: dict[str, int], word: list[tuple[str, int]]) -> int:
    x = g.identity
    for name, e in word:
        if name not in images:
            raise InputError(f"relation uses unknown generator {name!r}")
        x = g.mul(x, g.power(images[name], e))
    return x


def presented_order(generators: Sequence[str], relations: Sequence[str],
                    max_cosets: int = 4096) -> int | None:
    """Order of <generators | relations> by coset enumeration.

    None when the enumeration exceeds ``max_cosets`` (the group may be infinite).
    """
    free, *syms = free_group(",".join(generators))
    lookup = dict(zip(generators, syms))
    rels = []
    for r in split_relations(relations):
        w = free.identity
        for name, e in parse_relation(r):
            if name not in lookup:
                raise InputError(f"relation uses unknown generator {name!r}")
            w = w * lookup[name] ** e
        if w != free.identity:
            rels.append(w)
    # index of the trivial subgroup; FpGroup.order() would build extra groups
    try:
        table = FpGroup(free, rels).coset_enumeration([], max_cosets=max_cosets)
    except ValueError:
        return None
    table.compress()
    return len(table.table)


@dataclass
class PresentationReport:
    relations_hold: bool
    generates: bool
    presented_order: int | None
    failed: list[str]

    @property
    def ok(self) -> bool:
        return self.relations_hold and self.generates and self.presented_order is not None

    def to_dict(self) -> dict:
        return {"relations_hold": self.relations_hold, "generates": self.generates,
                "presented_order": self.presented_order, "failed_relations": self.failed,
                "verified": self.ok}


def check_presentation(g: FiniteGroup, gens: dict[str, Any],
                       relations: Sequence[str]) -> PresentationReport:
    images = {name: g.index(v) for name, v in gens.items()}
    failed = [r for r in split_relations(relations)
              if evaluate_word(g, images, parse_relation(r)) != g.identity]
    generates = len(g.subgroup(list(images.values()))) == g.order
    order = None
    if not failed and generates:
        # relations hold and the images generate, so <gens|rels> maps onto G;
        # equal orders make that surjection an isomorphism
        n = presented_order(list(gens), relations)
        order = n if n == g.order else None
    return PresentationReport(not failed, generates, order, failed)


def verify_presentation(g: FiniteGroup, gens: dict[str, Any], relations: Sequence[str]) -> bool:
    """True iff the relations hold, the images generate G, and the presentation has order |G|."""
    return check_presentation(g, gens, relations).ok


# the presentation of pi_1(W_{3,3}(RP^3)) in terms of the beta loops
BETA_RELATIONS = [
    "b1^4 = 1",
    "b2^2 = b1^2",
    "b2^-1 b1 b2 = b1^-1",
    "b3^2 = 1",
    "[b1,b3] = 1",
    "[b2,b3] = 1",
]
