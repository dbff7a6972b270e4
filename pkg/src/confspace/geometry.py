"""Ambient spaces, configurations and membership in W_{k,n}(M).

A configuration is an n-tuple of points of M = R^d, S^m or RP^m stored as an
(n, coord_dim) array.  Membership asks that every k of the n points be
linearly independent.  Rank decisions are made either numerically (singular
values against ``eps_rank``) or exactly over the rationals.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any, Sequence

import numpy as np

from .errors import DegenerateInputError, InputError, SamplingError, UnsupportedError


class UnsatisfiableSpecError(InputError):
    """No configuration can exist for this spec (k exceeds the coordinate dimension)."""


class Ambient(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    PROJECTIVE = "rp"

    @classmethod
    def parse(cls, name: str) -> "Ambient":
        aliases = {"r": cls.EUCLIDEAN, "rn": cls.EUCLIDEAN, "projective": cls.PROJECTIVE,
                   "s": cls.SPHERE}
        try:
            return cls(name.lower())
        except ValueError:
            if name.lower() in aliases:
                return aliases[name.lower()]
            raise InputError(f"unknown ambient {name!r}") from None


class Mode(enum.Enum):
    FLOAT = "float"
    EXACT = "exact"


@dataclass(frozen=True)
class Tolerance:
    eps_rank: float = 1e-9
    eps_norm: float = 1e-9
    mode: Mode = Mode.FLOAT

    def __post_init__(self):
        if self.eps_rank < 0 or self.eps_norm < 0:
            raise InputError("tolerances must be nonnegative")
        if self.mode is Mode.FLOAT and self.eps_rank <= 0:
            raise InputError("eps_rank must be positive in FLOAT mode")


DEFAULT_TOL = Tolerance()
EXACT_TOL = Tolerance(eps_rank=0.0, eps_norm=0.0, mode=Mode.EXACT)


@dataclass(frozen=True)
class SpaceSpec:
    """W_{k,n}(M).  ``dim`` is m for S^m and RP^m, d for R^d."""

    ambient: Ambient
    dim: int
    k: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "ambient", Ambient(self.ambient))
        if self.dim < 1 or self.k < 1 or self.n < 1:
            raise InputError(f"dim, k, n must be positive: {self}")
        if self.n < self.k:
            raise InputError(
                f"n={self.n} < k={self.k}; use SpaceSpec.normalized to reduce to W_(n,n)")

    @classmethod
    def normalized(cls, ambient: Ambient | str, dim: int, k: int, n: int) -> "SpaceSpec":
        """Build W_{k,n}, replacing it by the equal space W_{n,n} when n < k."""
        return cls(Ambient(ambient), dim, min(k, n), n)

    @classmethod
    def sphere(cls, m: int, k: int, n: int) -> "SpaceSpec":
        return cls(Ambient.SPHERE, m, k, n)

    @classmethod
    def projective(cls, m: int, k: int, n: int) -> "SpaceSpec":
        return cls(Ambient.PROJECTIVE, m, k, n)

    @classmethod
    def euclidean(cls, d: int, k: int, n: int) -> "SpaceSpec":
        return cls(Ambient.EUCLIDEAN, d, k, n)

    @property
    def coord_dim(self) -> int:
        return self.dim if self.ambient is Ambient.EUCLIDEAN else self.dim + 1

    @property
    def satisfiable(self) -> bool:
        return self.k <= self.coord_dim

    def with_n(self, n: int) -> "SpaceSpec":
        return SpaceSpec(self.ambient, self.dim, self.k, n)

    def with_ambient(self, ambient: Ambient) -> "SpaceSpec":
        if ambient is Ambient.EUCLIDEAN and self.ambient is not Ambient.EUCLIDEAN:
            return SpaceSpec(ambient, self.dim + 1, self.k, self.n)
        if ambient is not Ambient.EUCLIDEAN and self.ambient is Ambient.EUCLIDEAN:
            return SpaceSpec(ambient, self.dim - 1, self.k, self.n)
        return SpaceSpec(ambient, self.dim, self.k, self.n)

    def to_dict(self) -> dict:
        key = "d" if self.ambient is Ambient.EUCLIDEAN else "m"
        return {"ambient": self.ambient.value, key: self.dim, "k": self.k, "n": self.n}

    def __str__(self):
        space = {Ambient.EUCLIDEAN: f"R^{self.dim}", Ambient.SPHERE: f"S^{self.dim}",
                 Ambient.PROJECTIVE: f"RP^{self.dim}"}[self.ambient]
        return f"W_{{{self.k},{self.n}}}({space})"


# -- points -----------------------------------------------------------------

def _to_fraction(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, np.integer):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    if isinstance(x, (float, np.floating)) and float(x).is_integer():
        return Fraction(int(x))
    raise InputError(f"EXACT mode admits only rational inputs, got {x!r}")


def canonical_projective(v: np.ndarray, exact: bool = False) -> np.ndarray:
    """Canonical representative of [v]: first nonzero coordinate positive.

    Float vectors are also scaled to unit norm; exact vectors are scaled so the
    first nonzero coordinate equals 1 (unit norm is not rational in general).
    """
    if exact:
        nz = [x for x in v if x != 0]
        if not nz:
            raise DegenerateInputError("the zero vector has no projective class")
        lead = nz[0]
        return np.array([x / lead for x in v], dtype=object)
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise DegenerateInputError("the zero vector has no projective class")
    if abs(norm - 1.0) > 4 * np.finfo(float).eps:
        # already-canonical input is returned bit-for-bit, so canonicalization is idempotent
        v = v / norm
    lead = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
    return v if lead > 0 else -v


def basis_vector(i: int, dim: int) -> np.ndarray:
    """e_{i+1} in R^dim (zero-based index)."""
    e = np.zeros(dim)
    e[i] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class Configuration:
    spec: SpaceSpec
    points: np.ndarray

    def __post_init__(self):
        pts = self.points
        if not isinstance(pts, np.ndarray):
            pts = np.asarray(pts)
        exact = pts.dtype == object
        if not exact:
            pts = np.array(pts, dtype=float)
        if pts.ndim != 2 or pts.shape != (self.spec.n, self.spec.coord_dim):
            raise InputError(
                f"expected {self.spec.n} points of dimension {self.spec.coord_dim}, "
                f"got shape {pts.shape}")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def build(cls, spec: SpaceSpec, points: Sequence[Sequence[Any]],
              tol: Tolerance = DEFAULT_TOL) -> "Configuration":
        """Validate ambient invariants; projective points are canonicalized."""
        if tol.mode is Mode.EXACT:
            arr = np.array([[_to_fraction(x) for x in row] for row in points], dtype=object)
        else:
            arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape != (spec.n, spec.coord_dim):
            raise InputError(
                f"expected {spec.n} points of dimension {spec.coord_dim}, got shape {arr.shape}")
        exact = arr.dtype == object
        if spec.ambient is Ambient.SPHERE:
            for p in arr:
                sq = sum(x * x for x in p) if exact else float(p @ p)
                if exact and sq != 1:
                    raise InputError(f"point {list(p)} is not on the unit sphere")
                if not exact and abs(math.sqrt(sq) - 1.0) > max(tol.eps_norm, 1e-12):
                    raise InputError(f"point {p} is not on the unit sphere (norm {math.sqrt(sq)})")
        elif spec.ambient is Ambient.PROJECTIVE:
            arr = np.array([canonical_projective(p, exact) for p in arr],
                           dtype=object if exact else float)
        return cls(spec, arr)

    @property
    def exact(self) -> bool:
        return self.points.dtype == object

    @property
    def n(self) -> int:
        return self.spec.n

    def __len__(self):
        return self.spec.n

    def __getitem__(self, i):
        return self.points[i]

    def allclose(self, other: "Configuration", atol: float = 1e-9) -> bool:
        if self.spec != other.spec:
            return False
        return bool(np.allclose(np.asarray(self.points, dtype=float),
                                np.asarray(other.points, dtype=float), rtol=0, atol=atol))

    def as_float(self) -> "Configuration":
        if not self.exact:
            return self
        return Configuration(self.spec, np.asarray(self.points, dtype=float))

    def to_dict(self) -> dict:
        d = self.spec.to_dict()
        if self.exact:
            d["points"] = [[[x.numerator, x.denominator] for x in row] for row in self.points]
        else:
            d["points"] = self.points.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict, tol: Tolerance = DEFAULT_TOL) -> "Configuration":
        ambient = Ambient.parse(d["ambient"])
        dim = d["d"] if ambient is Ambient.EUCLIDEAN and "d" in d else d["m"]
        spec = SpaceSpec(ambient, int(dim), int(d["k"]), int(d.get("n", len(d["points"]))))
        pts = d["points"]
        exact = bool(pts) and bool(pts[0]) and isinstance(pts[0][0], (list, tuple))
        if exact:
            tol = EXACT_TOL
        return cls.build(spec, pts, tol)

    def __repr__(self):
        return f"Configuration({self.spec}, {self.points.tolist()})"


# -- rank and membership ----------------------------------------------------

def _exact_rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(rank + 1, len(m)):
            f = m[r][col] / m[rank][col]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def exact_det(rows: Sequence[Sequence[Any]]) -> Fraction:
    """Determinant over the rationals by fraction-exact elimination."""
    m = [[_to_fraction(x) for x in r] for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


def rank(vectors: Sequence[Sequence[Any]], tol: Tolerance = DEFAULT_TOL) -> int:
    """Rank of a set of coordinate vectors."""
    vectors = list(vectors)
    if not vectors:
        return 0
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise InputError(f"vectors of mixed dimension {sorted(dims)}")
    if tol.mode is Mode.EXACT:
        return _exact_rank([[_to_fraction(x) for x in v] for v in vectors])
    a = np.asarray(vectors, dtype=float)
    sv = np.linalg.svd(a, compute_uv=False)
    return int(np.count_nonzero(sv > tol.eps_rank))


def subset_ranks(points: np.ndarray, k: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rank of every k-subset of rows, in itertools.combinations order."""
    n = len(points)
    subsets = list(itertools.combinations(range(n), k))
    if tol.mode is Mode.EXACT or points.dtype == object:
        return np.array([rank([points[i] for i in s], tol if tol.mode is Mode.EXACT else EXACT_TOL)
                         for s in subsets])
    stack = points[np.array(subsets)]
    sv = np.linalg.svd(stack, compute_uv=False)
    return np.count_nonzero(sv > tol.eps_rank, axis=1)


def is_member(c: Configuration, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff every k-subset of the configuration is linearly independent."""
    k = c.spec.k
    if k > c.spec.coord_dim:
        return False
    if tol.mode is Mode.EXACT and not c.exact:
        raise InputError("EXACT mode needs a configuration with rational coordinates")
    if tol.mode is Mode.FLOAT and c.exact:
        c = c.as_float()
    if k == 1:
        if c.exact:
            return all(any(x != 0 for x in p) for p in c.points)
        return bool(np.all(np.linalg.norm(c.points, axis=1) > tol.eps_rank))
    return bool(np.all(subset_ranks(c.points, k, tol) == k))


# -- distinguished configurations --------------------------------------------

def canonical_base(spec: SpaceSpec, exact: bool = False) -> Configuration:
    """b_k, b~_k or the projective frame for the given spec.

    * n = k: (e_1, ..., e_k)
    * n = k+1, sphere/euclidean: (e_1, ..., e_k, (e_1+...+e_k)/|e_1+...+e_k|)
    * n = k+1, projective: ([e_1], ..., [e_k], [e_1+...+e_k])
    """
    d, k, n = spec.coord_dim, spec.k, spec.n
    if k > d:
        raise UnsatisfiableSpecError(f"{spec}: {k} independent vectors need dimension >= {k}")
    if n not in (k, k + 1):
        raise UnsupportedError(f"no canonical base point for {spec}")
    if exact:
        rows = [[Fraction(int(i == j)) for j in range(d)] for i in range(k)]
        if n == k + 1:
            if spec.ambient is Ambient.SPHERE and k > 1:
                raise UnsupportedError("normalized sum of basis vectors is irrational")
            rows.append([Fraction(int(j < k)) for j in range(d)])
        return Configuration.build(spec, rows, EXACT_TOL)
    rows = [basis_vector(i, d) for i in range(k)]
    if n == k + 1:
        s = np.sum(rows, axis=0)
        rows.append(s / np.linalg.norm(s) if spec.ambient is not Ambient.EUCLIDEAN else s)
    return Configuration.build(spec, rows)


def gram_schmidt(c: Configuration, tol: Tolerance = DEFAULT_TOL) -> Configuration:
    """Orthonormalize p_1, ..., p_n in order (span-preserving, <p_j, p'_j> > 0)."""
    spec = c.spec
    if spec.ambient is not Ambient.SPHERE or spec.k != spec.n or spec.n > spec.coord_dim:
        raise InputError(f"gram_schmidt needs W_(n,n)(S^m) with n <= m+1, got {spec}")
    pts = np.asarray(c.points, dtype=float)
    if rank(pts, tol) < spec.n:
        raise DegenerateInputError("points are linearly dependent")
    q, r = np.linalg.qr(pts.T)
    signs = np.sign(np.diag(r))
    q = q * signs
    return Configuration(spec, q.T)


def sample(spec: SpaceSpec, seed: int | None = None, max_tries: int = 1000,
           tol: Tolerance = DEFAULT_TOL) -> Configuration:
    """Rejection-sample a member of W_{k,n}(M); deterministic for a fixed seed."""
    if not spec.satisfiable:
        raise UnsatisfiableSpecError(
            f"{spec}: {spec.k} independent vectors need dimension >= {spec.k}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        pts = rng.standard_normal((spec.n, spec.coord_dim))
        if spec.ambient is not Ambient.EUCLIDEAN:
            norms = np.linalg.norm(pts, axis=1)
            if np.any(norms < 1e-6):
                continue
            pts = pts / norms[:, None]
        c = Configuration.build(spec, pts)
        if is_member(c, tol):
            return c
    raise SamplingError(f"no member of {spec} found in {max_tries} tries")


def cofactor_vector(vectors: Sequence[Sequence[Any]]) -> np.ndarray:
    """Generalized cross product of N-1 vectors in R^N.

    Entry j is (-1)^{j+N} times the minor obtained by deleting coordinate j
    (one-based), so that <y, v> = det(v_1, ..., v_{N-1}, v) for every v.
    Rational inputs (object arrays) are handled exactly.
    """
    rows = np.asarray(vectors, dtype=object if np.asarray(vectors).dtype == object else float)
    r, dim = rows.shape
    if r != dim - 1:
        raise InputError(f"need {dim - 1} vectors in R^{dim}, got {r}")
    exact = rows.dtype == object
    out = []
    for j in range(dim):
        minor = np.delete(rows, j, axis=1).T  # columns are the vectors
        if exact:
            det = exact_det(minor.tolist())
        else:
            det = float(np.linalg.det(minor)) if r else 1.0
        sign = -1 if (j + 1 + dim) % 2 else 1
        out.append(sign * det)
    return np.array(out, dtype=object if exact else float)
