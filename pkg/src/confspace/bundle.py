"""Retractions, the forgetful projection, local trivializations and cross-sections.

All maps act on :class:`~confspace.geometry.Configuration` values and return
new ones.  The bundle in question is the projection that forgets the last
point, W_{k,k+1}(S^m) -> W_{k,k}(S^m) for k = m or m+1, with fiber
S^m - Q_{k-1,k}(S^m)_{b_k}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .arrangements import QSpec, q_contains
from .errors import BoundaryError, DegenerateInputError, InputError
from .geometry import (
    DEFAULT_TOL,
    Ambient,
    Configuration,
    SpaceSpec,
    Tolerance,
    canonical_base,
    canonical_projective,
    cofactor_vector,
    gram_schmidt,
    is_member,
    rank,
)


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal vectors v_1, ..., v_n in R^N, stored as rows."""

    columns: np.ndarray

    def __post_init__(self):
        v = np.array(self.columns, dtype=float)
        if v.ndim != 2 or np.abs(v @ v.T - np.eye(len(v))).max() > 1e-9:
            raise InputError("frame vectors are not orthonormal")
        v.flags.writeable = False
        object.__setattr__(self, "columns", v)

    def rotation(self) -> np.ndarray:
        """Complete to a matrix in SO(N) whose first columns are the frame."""
        v = self.columns
        n, dim = v.shape
        if n == dim:
            m = v.T.copy()
            if np.linalg.det(m) < 0:
                raise InputError("full frame is negatively oriented")
            return m
        # orthonormal complement from a full QR of the frame
        q, _ = np.linalg.qr(v.T, mode="complete")
        m = np.column_stack([v.T, q[:, n:]])
        if np.linalg.det(m) < 0:
            m[:, -1] = -m[:, -1]
        return m


@dataclass(frozen=True, eq=False)
class LinearMap:
    matrix: np.ndarray

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("linear map must be square")
        a.flags.writeable = False
        object.__setattr__(self, "matrix", a)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)

    def to_json(self) -> str:
        return json.dumps(self.matrix.tolist())

    @classmethod
    def from_json(cls, text: str) -> "LinearMap":
        return cls(np.array(json.loads(text), dtype=float))


def _require_member(c: Configuration, tol: Tolerance) -> None:
    if not is_member(c, tol):
        raise DegenerateInputError(f"configuration is not a member of {c.spec}")


# -- retractions ------------------------------------------------------------

def project(c: Configuration) -> Configuration:
    """Forget the last point: W_{k,n+1}(M) -> W_{k,n}(M)."""
    if c.spec.n - 1 < c.spec.k:
        raise InputError(f"cannot project {c.spec}: the result would have n < k")
    return Configuration(c.spec.with_n(c.spec.n - 1), c.points[:-1])


def unitize_retraction(c: Configuration, t: float) -> Configuration:
    """Straight-line homotopy from p_i to p_i/|p_i| inside W_{k,n}(R^{m+1})."""
    if c.spec.ambient is not Ambient.EUCLIDEAN:
        raise InputError("unitize_retraction acts on euclidean configurations")
    pts = np.asarray(c.points, dtype=float)
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms == 0):
        raise DegenerateInputError("zero vector in configuration")
    return Configuration(c.spec, (1 - t) * pts + t * pts / norms[:, None])


def unitize(c: Configuration) -> Configuration:
    """Endpoint of :func:`unitize_retraction`, viewed as a configuration on S^m."""
    end = unitize_retraction(c, 1.0)
    return Configuration(c.spec.with_ambient(Ambient.SPHERE), end.points)


def gs_retraction(c: Configuration, t: float, tol: Tolerance = DEFAULT_TOL) -> Configuration:
    """Deformation of W_{n,n}(S^m) onto the Stiefel manifold V_{m+1,n}.

    Each point moves along h(p_i, t) = (1-t) p_i + t p'_i, renormalized, where
    p' is the Gram-Schmidt frame of p.
    """
    target = gram_schmidt(c, tol)
    p = np.asarray(c.points, dtype=float)
    h = (1 - t) * p + t * target.points
    return Configuration(c.spec, h / np.linalg.norm(h, axis=1)[:, None])


# -- frame completion and trivialization --------------------------------------

def complete_frame(x, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unit vector orthogonal to x_1..x_m in R^{m+1} with det(x, v) > 0.

    Computed from the null space of the m x (m+1) matrix (SVD), independently
    of the cofactor formula used by :func:`section_orth`.
    """
    x = np.asarray(x.points if isinstance(x, Configuration) else x, dtype=float)
    m, dim = x.shape
    if dim != m + 1:
        raise InputError(f"need m vectors in R^(m+1), got {m} in R^{dim}")
    if rank(x, tol) < m:
        raise DegenerateInputError("vectors are linearly dependent")
    _, _, vt = np.linalg.svd(x)
    v = vt[-1]
    v = v / np.linalg.norm(v)
    if np.linalg.det(np.vstack([x, v])) < 0:
        v = -v
    return v


def basis_matrix(x: Configuration, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Columns x_1, ..., x_{m+1} of the linear map sending e_i to x_i.

    With m points the last column is the positive unit normal; with m+1 points
    the points themselves form the basis.
    """
    spec = x.spec
    if spec.ambient is Ambient.PROJECTIVE or spec.k != spec.n:
        raise InputError(f"trivialization needs a point of W_(k,k), got {spec}")
    pts = np.asarray(x.points, dtype=float)
    dim = spec.coord_dim
    if spec.n == dim - 1:
        return np.column_stack([pts.T, complete_frame(pts, tol)])
    if spec.n == dim:
        if rank(pts, tol) < dim:
            raise DegenerateInputError("points are linearly dependent")
        return pts.T.copy()
    raise InputError(f"trivialization needs k = m or m+1, got {spec}")


def _excluded(x: Configuration, y: np.ndarray, tol: Tolerance) -> bool:
    return q_contains(y, QSpec(x, x.spec.k - 1), tol)


def _reference_base(x: Configuration) -> Configuration:
    return canonical_base(SpaceSpec(Ambient.SPHERE, x.spec.coord_dim - 1, x.spec.k, x.spec.k))


def trivialize(x: Configuration, y, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """f_x(y) = phi_x(y)/|phi_x(y)|: fiber over b_k -> fiber over x."""
    y = np.asarray(y, dtype=float)
    if _excluded(_reference_base(x), y, tol):
        raise BoundaryError("point lies in the excluded set over the base point")
    z = basis_matrix(x, tol) @ y
    return z / np.linalg.norm(z)


def untrivialize(x: Configuration, y, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """f_x^{-1}(y): fiber over x -> fiber over b_k."""
    y = np.asarray(y, dtype=float)
    if _excluded(x, y, tol):
        raise BoundaryError("point lies in the excluded set over x")
    z = np.linalg.solve(basis_matrix(x, tol), y)
    z = z / np.linalg.norm(z)
    if _excluded(_reference_base(x), z, tol):
        raise BoundaryError("preimage lands in the excluded set over the base point")
    return z


def chart(c: Configuration, tol: Tolerance = DEFAULT_TOL) -> tuple[Configuration, np.ndarray]:
    """Local trivialization h(x_1..x_k, y) = (x, f_x^{-1}(y)).

    Euclidean configurations are handled on the unit sphere and the norm of
    the last vector is carried along as a radial factor.
    """
    base = project(c)
    y = np.asarray(c.points[-1], dtype=float)
    if c.spec.ambient is Ambient.EUCLIDEAN:
        r = np.linalg.norm(y)
        return base, r * untrivialize(unitize(base), y / r, tol)
    return base, untrivialize(base, y, tol)


def chart_inverse(x: Configuration, fiber_point, tol: Tolerance = DEFAULT_TOL) -> Configuration:
    """h^{-1}(x, y') = (x, f_x(y'))."""
    fiber_point = np.asarray(fiber_point, dtype=float)
    if x.spec.ambient is Ambient.EUCLIDEAN:
        r = np.linalg.norm(fiber_point)
        y = r * trivialize(unitize(x), fiber_point / r, tol)
    else:
        y = trivialize(x, fiber_point, tol)
    return Configuration(x.spec.with_n(x.spec.n + 1), np.vstack([x.points, y]))


# -- cross-sections ----------------------------------------------------------

def section_sum(c: Configuration, tol: Tolerance = DEFAULT_TOL) -> Configuration:
    """Append the normalized sum (p_1+...+p_k)/|p_1+...+p_k|."""
    if c.spec.k != c.spec.n or c.spec.ambient is Ambient.PROJECTIVE:
        raise InputError(f"section_sum needs W_(k,k)(S^m) or W_(k,k)(R^(m+1)), got {c.spec}")
    _require_member(c, tol)
    pts = np.asarray(c.points, dtype=float)
    s = pts.sum(axis=0)
    norm = np.linalg.norm(s)
    assert norm > 0, "independent vectors cannot sum to zero"
    return Configuration(c.spec.with_n(c.spec.n + 1), np.vstack([pts, s / norm]))


def section_orth(c: Configuration, tol: Tolerance = DEFAULT_TOL) -> Configuration:
    """Append y/|y| where y is the signed cofactor vector of p_1..p_m."""
    spec = c.spec
    if spec.k != spec.n or spec.n != spec.coord_dim - 1 or spec.ambient is Ambient.PROJECTIVE:
        raise InputError(f"section_orth needs W_(m,m)(S^m), got {spec}")
    _require_member(c, tol)
    pts = np.asarray(c.points, dtype=float)
    y = cofactor_vector(pts)
    return Configuration(spec.with_n(spec.n + 1), np.vstack([pts, y / np.linalg.norm(y)]))


# -- projective frames --------------------------------------------------------

def projective_frame(c: Configuration, tol: Tolerance = DEFAULT_TOL) -> LinearMap:
    """The projective transformation carrying the standard frame to c.

    For m+2 points in general position in RP^m, returns A with [A e_i] = p_i
    (i <= m+1) and [A(e_1+...+e_{m+1})] = p_{m+2}, scaled to |det A| = 1 and
    signed so that the first nonzero entry of column 1 is positive.
    """
    spec = c.spec
    dim = spec.coord_dim
    if spec.ambient is not Ambient.PROJECTIVE or spec.n != dim + 1:
        raise InputError(f"projective_frame needs m+2 points of RP^m, got {spec}")
    if not _general_position(c, tol):
        raise DegenerateInputError("points are not in general position")
    v = np.asarray(c.points, dtype=float)
    basis = v[:dim].T
    lam = np.linalg.solve(basis, v[dim])
    if np.any(np.abs(lam) <= tol.eps_rank):
        raise DegenerateInputError("points are not in general position")
    a = basis * lam
    a = a / abs(np.linalg.det(a)) ** (1.0 / dim)
    col = a[:, 0]
    if col[np.flatnonzero(np.abs(col) > 1e-12)[0]] < 0:
        a = -a
    return LinearMap(a)


def _general_position(c: Configuration, tol: Tolerance) -> bool:
    dim = c.spec.coord_dim
    spec = SpaceSpec(Ambient.PROJECTIVE, dim - 1, dim, dim + 1)
    return is_member(Configuration(spec, np.asarray(c.points, dtype=float)), tol)


def apply_projective(a: LinearMap, c: Configuration) -> Configuration:
    """Image configuration ([A p_1], ..., [A p_n])."""
    if c.spec.ambient is not Ambient.PROJECTIVE:
        raise InputError("apply_projective acts on projective configurations")
    pts = [canonical_projective(a(p)) for p in np.asarray(c.points, dtype=float)]
    return Configuration(c.spec, np.array(pts))
