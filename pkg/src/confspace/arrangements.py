"""Degeneracy sets Q_{k-1,n}(M)_p and the combinatorics of their complements.

Q_{k-1,n}(M)_p is the set of x in M such that x together with some k-1 of the
points of p is linearly dependent, i.e. the union of the spans of all
(k-1)-subsets of p.  When those spans are hyperplanes the complement splits
into open cells indexed by sign vectors of the determinant forms
x -> det(p_{i_1}, ..., p_{i_{k-1}}, x); cells are enumerated by linear
programming feasibility of each sign pattern.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import DisconnectedGraphError, InputError, UnsupportedError
from .geometry import (
    DEFAULT_TOL,
    Ambient,
    Configuration,
    SpaceSpec,
    Tolerance,
    basis_vector,
    canonical_base,
    cofactor_vector,
    is_member,
    rank,
)


@dataclass(frozen=True, eq=False)
class QSpec:
    """Q_{arity, n}(M)_base: union over arity-subsets S of span(base_S)."""

    base: Configuration
    arity: int

    def __post_init__(self):
        if self.arity < 0 or self.arity > self.base.spec.n:
            raise InputError(f"arity {self.arity} out of range for {self.base.spec}")
        if not is_member(self.base.as_float()):
            raise InputError("base configuration must be a member of its space")

    @property
    def ambient(self):
        return self.base.spec

    @property
    def dim(self) -> int:
        return self.base.spec.coord_dim

    def subsets(self):
        return list(itertools.combinations(range(self.base.spec.n), self.arity))


def q_contains(x, q: QSpec, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff x and some arity-subset of the base are linearly dependent."""
    x = np.asarray(x, dtype=float)
    pts = np.asarray(q.base.points, dtype=float)
    if x.shape != (q.dim,):
        raise InputError(f"point of dimension {x.shape} for ambient dimension {q.dim}")
    for s in q.subsets():
        if rank([*pts[list(s)], x], tol) < q.arity + 1:
            return True
    return False


# -- cells -------------------------------------------------------------------

def defining_forms(q: QSpec) -> np.ndarray:
    """Linear forms x -> det(base_S, x), one row per subset S (hyperplane case only)."""
    if q.arity != q.dim - 1:
        raise UnsupportedError("determinant forms exist only when the spans are hyperplanes")
    pts = np.asarray(q.base.points, dtype=float)
    return np.array([cofactor_vector(pts[list(s)]) for s in q.subsets()])


def _feasible(forms: np.ndarray, signs: tuple[int, ...]) -> bool:
    # maximize eps subject to s_j <l_j, x> >= eps, |x_i| <= 1, eps <= 1
    d = forms.shape[1]
    a_ub = np.hstack([-np.asarray(signs)[:, None] * forms, np.ones((len(signs), 1))])
    res = linprog(c=np.r_[np.zeros(d), -1.0], A_ub=a_ub, b_ub=np.zeros(len(signs)),
                  bounds=[(-1, 1)] * d + [(None, 1)], method="highs")
    return res.status == 0 and -res.fun > 1e-9


def _projective_key(signs: tuple[int, ...]) -> tuple[int, ...]:
    return signs if signs[0] > 0 else tuple(-s for s in signs)


def complement_cells(q: QSpec) -> list[tuple[int, ...]]:
    """Sign vectors of the open cells of M - Q (hyperplane case).

    Built incrementally: a sign pattern on the first j forms is extended only
    if it is realized by some point.  For projective space antipodal cells
    are identified (first sign normalized to +).
    """
    forms = defining_forms(q)
    cells: list[tuple[int, ...]] = [()]
    for j in range(len(forms)):
        cells = [c + (s,) for c in cells for s in (1, -1) if _feasible(forms[: j + 1], c + (s,))]
    if q.ambient.ambient is Ambient.PROJECTIVE:
        cells = sorted({_projective_key(c) for c in cells}, reverse=True)
    return cells


def count_components_complement(q: QSpec) -> int:
    """Number of path components of M - Q_{arity,n}(M)_base."""
    d = q.dim
    if q.arity >= d:
        return 0
    if q.arity == d - 1:
        return len(complement_cells(q))
    if q.arity == 0:
        # Q is {0}: only R^1 - {0} is disconnected
        return 2 if q.ambient.ambient is Ambient.EUCLIDEAN and d == 1 else 1
    # spans of codimension >= 2 do not disconnect
    return 1


def sample_cells(q: QSpec, samples: int, seed: int | None = None,
                 margin: float = 1e-12) -> Counter:
    """Cells hit by uniformly random points of the sphere (or RP) in the ambient."""
    forms = defining_forms(q)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, q.dim))
    x /= np.linalg.norm(x, axis=1)[:, None]
    vals = x @ forms.T
    keep = np.all(np.abs(vals) > margin, axis=1)
    hits: Counter = Counter()
    projective = q.ambient.ambient is Ambient.PROJECTIVE
    for row in np.sign(vals[keep]).astype(int):
        key = tuple(int(s) for s in row)
        hits[_projective_key(key) if projective else key] += 1
    return hits


# -- graphs --------------------------------------------------------------------

@dataclass
class ArrangementGraph:
    vertices: list[str]
    edges: list[tuple[int, int]]
    edge_labels: list[str] = field(default_factory=list)
    cells: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges

    def components(self) -> int:
        parent = list(range(self.num_vertices))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in self.edges:
            parent[find(a)] = find(b)
        return len({find(i) for i in range(self.num_vertices)})

    def to_dict(self) -> dict:
        adjacency: dict[str, list[str]] = {v: [] for v in self.vertices}
        for a, b in self.edges:
            adjacency[self.vertices[a]].append(self.vertices[b])
            if a != b:
                adjacency[self.vertices[b]].append(self.vertices[a])
        return {
            "vertices": self.vertices,
            "adjacency": adjacency,
            "edges": [list(e) for e in self.edges],
            "edge_labels": self.edge_labels,
            "cells": [list(c) for c in self.cells],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArrangementGraph":
        return cls(list(d["vertices"]), [tuple(e) for e in d["edges"]],
                   list(d.get("edge_labels", [])), [tuple(c) for c in d.get("cells", [])])


def free_rank(g: ArrangementGraph) -> int:
    """Rank of the free fundamental group of a connected graph, E - V + 1."""
    comps = g.components()
    if comps != 1:
        raise DisconnectedGraphError(comps)
    return g.num_edges - g.num_vertices + 1


def _sign_label(signs) -> str:
    return "".join("+" if s > 0 else "-" if s < 0 else "0" for s in signs)


def _equatorial_point(signs, dim: int) -> np.ndarray:
    v = np.zeros(dim)
    v[: len(signs)] = signs
    return v / np.linalg.norm(v)


def _check_standard_base(q: QSpec) -> int:
    spec = q.ambient
    m = spec.dim
    if (spec.ambient is not Ambient.SPHERE or spec.k != m or spec.n != m
            or q.arity != m - 1 or m < 2):
        raise UnsupportedError("graph models exist only for Q_{m-1,m}(S^m) at b_m, m >= 2")
    if not q.base.allclose(canonical_base(spec)):
        raise UnsupportedError("graph models need the standard base point b_m")
    return m


def standard_q(m: int) -> QSpec:
    """Q_{m-1,m}(S^m)_{b_m}."""
    return QSpec(canonical_base(SpaceSpec.sphere(m, m, m)), m - 1)


def graph_model(q: QSpec, tol: Tolerance = DEFAULT_TOL) -> ArrangementGraph:
    """0- and 1-cells of the equatorial sphere cut by the coordinate hyperplanes.

    Q_{m-1,m}(S^m)_{b_m} lies in the equator S^{m-1} = S^m cap span(e_1..e_m).
    Faces of the coordinate decomposition of S^{m-1} are indexed by nonzero
    sign vectors in {-,0,+}^m: vertices have one nonzero entry (the points
    +-e_i), edges two (quarter arcs), chambers none zero.  For m = 3 the
    vertices and edges are exactly Q, a graph with 6 vertices and 12 edges.
    """
    m = _check_standard_base(q)
    dim = m + 1
    faces = [s for s in itertools.product((-1, 0, 1), repeat=m) if any(s)]
    verts = [s for s in faces if sum(map(abs, s)) == 1]
    index = {s: i for i, s in enumerate(verts)}
    edges, labels = [], []
    for s in faces:
        if sum(map(abs, s)) != 2:
            continue
        ends = []
        for i in np.flatnonzero(s):
            t = list(s)
            t[i] = 0
            ends.append(index[tuple(t)])
        edges.append(tuple(ends))
        labels.append(_sign_label(s))
    for s in verts:
        assert q_contains(_equatorial_point(s, dim), q, tol)
    if m >= 3:
        for lab in labels:
            s = [1 if ch == "+" else -1 if ch == "-" else 0 for ch in lab]
            assert q_contains(_equatorial_point(s, dim), q, tol)
    chambers = [s for s in faces if all(s)]
    names = [("+" if s[i] > 0 else "-") + f"e{i + 1}" for s in verts
             for i in np.flatnonzero(s)]
    return ArrangementGraph(names, edges, labels, chambers)


def dual_graph(q: QSpec, tol: Tolerance = DEFAULT_TOL) -> ArrangementGraph:
    """Dual graph of S^m - Q_{m-1,m}(S^m)_{b_m}.

    Two vertices for the open upper and lower hemispheres (x_{m+1} > 0 and
    x_{m+1} < 0), joined by one edge through each open chamber of the
    equator that misses Q.
    """
    m = _check_standard_base(q)
    dim = m + 1
    top = basis_vector(m, dim)
    if q_contains(top, q, tol) or q_contains(-top, q, tol):
        raise UnsupportedError("hemisphere centres meet Q")
    edges, labels, chambers = [], [], []
    for s in itertools.product((1, -1), repeat=m):
        if q_contains(_equatorial_point(s, dim), q, tol):
            continue
        edges.append((0, 1))
        labels.append(_sign_label(s))
        chambers.append(s)
    return ArrangementGraph(["upper", "lower"], edges, labels, chambers)


def arrangement_report(m: int) -> dict:
    """Cell counts, Euler characteristics and ranks for Q_{m-1,m}(S^m)_{b_m}
    and the component count of S^m - Q_{m,m+1}(S^m)_{b_{m+1}}."""
    q = standard_q(m)
    g, dg = graph_model(q), dual_graph(q)
    qq = QSpec(canonical_base(SpaceSpec.sphere(m, m + 1, m + 1)), m)
    return {
        "m": m,
        "graph": {"vertices": g.num_vertices, "edges": g.num_edges,
                  "euler_characteristic": g.euler_characteristic,
                  "chambers": len(g.cells)},
        "dual_graph": {"vertices": dg.num_vertices, "edges": dg.num_edges,
                       "euler_characteristic": dg.euler_characteristic},
        "free_rank": free_rank(dg),
        "free_rank_confidence": "PAPER" if m == 3 else "DERIVED_BEYOND_PAPER",
        "hyperplane_complement_components": count_components_complement(qq),
    }
