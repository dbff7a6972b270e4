"""Sampled paths, the named loops, covering and spin lifts, and the homotopy H.

Paths are stored as samples on an increasing time grid.  When a path also
carries its evaluator (``source``), lifting refines any step that is too
coarse for unambiguous continuation by bisection; otherwise such a step
raises :class:`~confspace.errors.MeshError`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
import scipy.linalg

from .bundle import Frame, complete_frame, gs_retraction
from .clifford import CliffordElement, Multivector, nearest_element, rotation_matrix, rotor_from_generator
from .errors import InputError, MeshError, UnsupportedError
from .geometry import (
    DEFAULT_TOL,
    Ambient,
    Configuration,
    SpaceSpec,
    Tolerance,
    canonical_projective,
    gram_schmidt,
    is_member,
)

# continuation accepts a step only if the chosen preimage is at least twice
# as close as the other one
MARGIN = 2.0
MAX_REFINE_DEPTH = 30


@dataclass(frozen=True, eq=False)
class SampledPath:
    samples: tuple
    times: np.ndarray
    source: Callable[[float], Any] | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "times", t)
        if len(t) != len(self.samples) or len(t) < 1:
            raise InputError("times and samples must have equal, nonzero length")
        if abs(t[0]) > 1e-12 or abs(t[-1] - 1) > 1e-12 or np.any(np.diff(t) <= 0):
            raise InputError("times must increase from 0 to 1")

    @classmethod
    def from_function(cls, f: Callable[[float], Any], samples: int = 257) -> "SampledPath":
        times = np.linspace(0.0, 1.0, samples)
        return cls(tuple(f(float(t)) for t in times), times, f)

    def __len__(self):
        return len(self.samples)

    @property
    def start(self):
        return self.samples[0]

    @property
    def end(self):
        return self.samples[-1]

    @property
    def mesh(self) -> float:
        """Largest sup-norm distance between consecutive samples (up to sign in RP)."""
        if len(self) < 2:
            return 0.0
        return max(_distance(a, b) for a, b in zip(self.samples, self.samples[1:]))

    @property
    def closed(self) -> bool:
        return _distance(self.start, self.end) <= 1e-9

    def reverse(self) -> "SampledPath":
        src = self.source
        return SampledPath(self.samples[::-1], 1.0 - self.times[::-1],
                           (lambda t: src(1.0 - t)) if src else None)

    def concat(self, other: "SampledPath") -> "SampledPath":
        """The path self followed by other, each run at double speed."""
        if _distance(self.end, other.start) > 1e-9:
            raise InputError("paths do not meet")
        times = np.concatenate([self.times / 2, 0.5 + other.times[1:] / 2])
        src = None
        if self.source and other.source:
            a, b = self.source, other.source
            src = lambda t: a(2 * t) if t <= 0.5 else b(2 * t - 1)  # noqa: E731
        return SampledPath(self.samples + other.samples[1:], times, src)

    def at(self, t: float):
        """Evaluate at t: exact if the evaluator is known, otherwise interpolated."""
        if self.source is not None:
            return self.source(t)
        i = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self) - 2))
        t0, t1 = self.times[i], self.times[i + 1]
        w = (t - t0) / (t1 - t0)
        a, b = self.samples[i], self.samples[i + 1]
        if isinstance(a, Configuration):
            pts = (1 - w) * np.asarray(a.points, float) + w * np.asarray(b.points, float)
            if a.spec.ambient is not Ambient.EUCLIDEAN:
                pts /= np.linalg.norm(pts, axis=1)[:, None]
            return Configuration.build(a.spec, pts)
        v = (1 - w) * np.asarray(a) + w * np.asarray(b)
        if v.ndim == 1:
            v = v / np.linalg.norm(v)
        return v

    def to_list(self) -> list:
        return [[float(t), s.to_dict() if isinstance(s, Configuration) else np.asarray(s).tolist()]
                for t, s in zip(self.times, self.samples)]

    @classmethod
    def from_list(cls, data: list) -> "SampledPath":
        times = [row[0] for row in data]
        samples = [Configuration.from_dict(row[1]) if isinstance(row[1], dict)
                   else np.asarray(row[1], dtype=float) for row in data]
        return cls(tuple(samples), np.asarray(times))


def _distance(a, b) -> float:
    if isinstance(a, Configuration):
        pa, pb = np.asarray(a.points, float), np.asarray(b.points, float)
        if a.spec.ambient is Ambient.PROJECTIVE:
            d1 = np.abs(pa - pb).max(axis=1)
            d2 = np.abs(pa + pb).max(axis=1)
            return float(np.minimum(d1, d2).max())
        return float(np.abs(pa - pb).max())
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


@dataclass(frozen=True)
class SignVector:
    signs: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (1, -1) for s in self.signs):
            raise InputError("sign vector entries must be +1 or -1")

    @classmethod
    def identity(cls, n: int) -> "SignVector":
        return cls((1,) * n)

    def __mul__(self, other: "SignVector") -> "SignVector":
        if len(self.signs) != len(other.signs):
            raise InputError("sign vectors of different length")
        return SignVector(tuple(a * b for a, b in zip(self.signs, other.signs)))

    def __str__(self):
        return "(" + ",".join("+" if s > 0 else "-" for s in self.signs) + ")"


# -- named loops -----------------------------------------------------------------

def plane_rotation(dim: int, i: int, j: int, angle: float) -> np.ndarray:
    """Identity except the block [[cos, sin], [-sin, cos]] in rows/columns i, j (zero-based)."""
    r = np.eye(dim)
    c, s = math.cos(angle), math.sin(angle)
    r[i, i], r[i, j], r[j, i], r[j, j] = c, s, -s, c
    return r


def r_matrix(m: int, t: float) -> np.ndarray:
    """r(t) = I_{m-1} + the cos 2 pi t block on the last two coordinates of R^{m+1}."""
    return plane_rotation(m + 1, m - 1, m, 2 * math.pi * t)


def delta_matrix(which: int, t: float) -> np.ndarray:
    """delta_1, delta_2, delta_3: rotations of R^4 by pi t in planes (3,4), (2,3), (1,2)+(3,4)."""
    if which == 1:
        return plane_rotation(4, 2, 3, math.pi * t)
    if which == 2:
        return plane_rotation(4, 1, 2, math.pi * t)
    if which == 3:
        return plane_rotation(4, 0, 1, math.pi * t) @ plane_rotation(4, 2, 3, math.pi * t)
    raise InputError(f"no delta path {which}")


class LoopName(str, enum.Enum):
    R_LOOP = "r"
    ALPHA = "alpha"
    DELTA1 = "delta1"
    DELTA2 = "delta2"
    DELTA3 = "delta3"
    BETA1 = "beta1"
    BETA2 = "beta2"
    BETA3 = "beta3"


@dataclass(frozen=True)
class NamedLoop:
    """One of the explicit loops.

    R_LOOP(m): the full frame r(t) in W_{m+1,m+1}(S^m).
    ALPHA(m): (r(t)e_1, ..., r(t)e_m) in W_{m,m}(S^m).
    DELTAi: (delta_i(t)e_1, delta_i(t)e_2, delta_i(t)e_3) in W_{3,3}(S^3).
    BETAi: the same points as projective classes in W_{3,3}(RP^3).
    """

    name: LoopName
    m: int = 3

    def __post_init__(self):
        object.__setattr__(self, "name", LoopName(self.name))
        if self.name in (LoopName.R_LOOP, LoopName.ALPHA):
            if self.m < 1:
                raise InputError("r and alpha need m >= 1")
        elif self.m != 3:
            raise InputError(f"{self.name.value} lives in dimension m = 3")

    @classmethod
    def parse(cls, text: str) -> "NamedLoop":
        """'alpha:3', 'r:2', 'beta1', 'DELTA2', 'ALPHA(4)'."""
        t = text.strip().lower().replace("(", ":").replace(")", "")
        name, _, m = t.partition(":")
        if name == "r_loop":
            name = "r"
        return cls(LoopName(name), int(m) if m else 3)

    @property
    def label(self) -> str:
        if self.name in (LoopName.R_LOOP, LoopName.ALPHA):
            return f"{self.name.value}:{self.m}"
        return self.name.value

    @property
    def spec(self) -> SpaceSpec:
        if self.name is LoopName.R_LOOP:
            return SpaceSpec.sphere(self.m, self.m + 1, self.m + 1)
        if self.name is LoopName.ALPHA:
            return SpaceSpec.sphere(self.m, self.m, self.m)
        if self.name.value.startswith("delta"):
            return SpaceSpec.sphere(3, 3, 3)
        return SpaceSpec.projective(3, 3, 3)

    def matrix(self, t: float) -> np.ndarray:
        if self.name in (LoopName.R_LOOP, LoopName.ALPHA):
            return r_matrix(self.m, t)
        return delta_matrix(int(self.name.value[-1]), t)

    def __call__(self, t: float) -> Configuration:
        spec = self.spec
        pts = self.matrix(t)[:, : spec.n].T
        if spec.ambient is Ambient.PROJECTIVE:
            return Configuration.build(spec, pts)
        return Configuration(spec, pts)


def eval_loop(loop: NamedLoop, t: float) -> Configuration:
    if not 0.0 <= t <= 1.0:
        raise InputError("t must lie in [0, 1]")
    return loop(t)


def loop_path(loop: NamedLoop, samples: int = 257) -> SampledPath:
    return SampledPath.from_function(loop, samples)


def rotation_path(loop: NamedLoop, samples: int = 257) -> SampledPath:
    """The loop's defining matrices r(t) or delta_i(t) as a path in SO(N)."""
    return SampledPath.from_function(loop.matrix, samples)


def check_in_space(path: SampledPath, tol: Tolerance = DEFAULT_TOL) -> bool:
    return all(is_member(c, tol) for c in path.samples)


# -- generic continuation ------------------------------------------------------------

class _Ambiguous(Exception):
    pass


def _continue(path: SampledPath, state, step, record: bool = False):
    """Run ``step(state, prev_sample, next_sample)`` along the path.

    Steps raising _Ambiguous are bisected through ``path.source`` when
    available.  Returns the final state and, if requested, the state at every
    original sample.
    """

    def advance(state, t0, a, t1, b, depth):
        try:
            return step(state, a, b)
        except _Ambiguous:
            if path.source is None or depth >= MAX_REFINE_DEPTH:
                raise MeshError(
                    f"continuation ambiguous between t={t0:.6g} and t={t1:.6g}; refine the mesh"
                ) from None
            tm = 0.5 * (t0 + t1)
            mid = path.source(tm)
            state = advance(state, t0, a, tm, mid, depth + 1)
            return advance(state, tm, mid, t1, b, depth + 1)

    states = [state] if record else None
    for i in range(1, len(path)):
        state = advance(state, path.times[i - 1], path.samples[i - 1],
                        path.times[i], path.samples[i], 0)
        if record:
            states.append(state)
    return state, states


# -- covering lifts -------------------------------------------------------------------

def _projective_points(c) -> np.ndarray:
    if not isinstance(c, Configuration) or c.spec.ambient is not Ambient.PROJECTIVE:
        raise InputError("cover_lift needs a path of projective configurations")
    return np.asarray(c.points, dtype=float)


def cover_lift(path: SampledPath, start: Configuration | None = None) -> SampledPath:
    """Lift a path in W_{k,n}(RP^m) to W_{k,n}(S^m) through the 2^n-sheeted cover.

    Each coordinate continues to the preimage nearer its predecessor; the
    step is accepted only when that preimage is at least twice as close as
    the antipodal one.
    """
    first = _projective_points(path.start)
    spec = path.start.spec.with_ambient(Ambient.SPHERE)
    if start is None:
        start_pts = first.copy()
    else:
        start_pts = np.asarray(start.points, dtype=float)
        if start.spec != spec:
            raise InputError(f"start must lie in {spec}")
        proj = np.array([canonical_projective(p) for p in start_pts])
        if np.abs(proj - first).max() > 1e-9:
            raise InputError("start does not project to the initial sample")

    def step(prev, _a, b):
        v = _projective_points(b)
        dots = np.einsum("ij,ij->i", prev, v)
        # |a - v| < |a + v| / MARGIN  <=>  dot > (MARGIN^2 - 1) / (MARGIN^2 + 1)
        if np.any(np.abs(dots) <= (MARGIN**2 - 1) / (MARGIN**2 + 1)):
            raise _Ambiguous
        return v * np.sign(dots)[:, None]

    _, states = _continue(path, start_pts, step, record=True)
    lifted = tuple(Configuration(spec, s) for s in states)
    return SampledPath(lifted, path.times)


def monodromy(loop: SampledPath, start: Configuration | None = None) -> SignVector:
    """Deck transformation reached by lifting a closed loop: end = sign * start."""
    if not loop.closed:
        raise InputError("monodromy needs a closed loop")
    lift = cover_lift(loop, start)
    a = np.asarray(lift.start.points, float)
    b = np.asarray(lift.end.points, float)
    dots = np.einsum("ij,ij->i", a, b)
    if np.any(np.abs(np.abs(dots) - 1) > 1e-6):
        raise MeshError("lift endpoint is not a sign change of the start")
    return SignVector(tuple(int(s) for s in np.sign(dots)))


# -- spin lifts ------------------------------------------------------------------------

def frame_matrix(c: Configuration, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rotation matrix attached to a point of W_{n,n}(S^m), n = m or m+1.

    The points are orthonormalized (Gram-Schmidt) and, when n = m, completed
    by the positive unit normal.
    """
    spec = c.spec
    if spec.ambient is not Ambient.SPHERE or spec.k != spec.n or spec.n < spec.coord_dim - 1:
        raise InputError(f"no rotation attached to points of {spec}")
    f = gram_schmidt(c, tol).points
    if spec.n == spec.coord_dim - 1:
        return np.column_stack([f.T, complete_frame(f, tol)])
    m = f.T.copy()
    if np.linalg.det(m) < 0:
        raise InputError("negatively oriented frame does not lie in SO(m+1)")
    return m


def _as_rotation(sample) -> np.ndarray:
    if isinstance(sample, Configuration):
        return frame_matrix(sample)
    return np.asarray(sample, dtype=float)


def _spin_state(path: SampledPath, relative: bool) -> tuple[Multivector, np.ndarray]:
    m0 = _as_rotation(path.start)
    n = m0.shape[0]
    if not relative and np.abs(m0 - np.eye(n)).max() > 1e-9:
        raise InputError("spin_lift needs a path starting at the identity (or relative=True)")

    def step(state, a, b):
        delta = _as_rotation(b) @ _as_rotation(a).T
        gen = scipy.linalg.logm(delta)
        if np.iscomplexobj(gen):
            if np.abs(gen.imag).max() > 1e-9:
                raise _Ambiguous
            gen = gen.real
        gen = 0.5 * (gen - gen.T)
        cand = rotor_from_generator(gen) * state
        near, far = (cand - state).norm(), (cand + state).norm()
        if far < near:
            cand, near, far = -cand, far, near
        if MARGIN * near >= far:
            raise _Ambiguous
        return cand

    rotor, _ = _continue(path, Multivector.scalar(n), step)
    target = _as_rotation(path.end) @ m0.T
    if np.abs(rotation_matrix(rotor) - target).max() > 1e-6:
        raise MeshError("spin continuation drifted from the sampled rotations")
    return rotor, target


def spin_lift(path: SampledPath, relative: bool = False) -> CliffordElement:
    """Endpoint of the continuation of a rotation path into the spin double cover.

    Samples are SO(N) matrices or points of W_{m,m}(S^m) / W_{m+1,m+1}(S^m)
    (converted by :func:`frame_matrix`).  The lift starts at +1; each step
    takes the preimage nearer the previous one.  The endpoint rotation must
    be diagonal with entries +-1, so the lift is exactly +-e_S with S the set
    of flipped axes; a closed loop lifts to +1 or -1 according to its class
    in pi_1(SO(N)) = Z_2.  With ``relative=True`` the path M(t) M(0)^{-1} is
    lifted instead, so paths need not start at the identity.
    """
    rotor, _ = _spin_state(path, relative)
    return nearest_element(rotor)


def spin_rotor(path: SampledPath, relative: bool = False) -> Multivector:
    """The continued rotor at the end of the path, without classification."""
    return _spin_state(path, relative)[0]


# -- the homotopy H ---------------------------------------------------------------------

def homotopy_H(s: float, t: float, x: Callable[[float], np.ndarray] | SampledPath,
               m: int) -> Configuration:
    """H(s, t) deforming K(alpha) . i(x) . K(alpha^{-1}) to i(x) in W_{m,m+1}(S^m).

    x is a loop in S^m - Q_{m-1,m}(S^m)_{b_m} based at e_{m+1}.
    """
    if not (0 <= s <= 1 and 0 <= t <= 1):
        raise InputError("s and t must lie in [0, 1]")
    ev = x.at if isinstance(x, SampledPath) else x
    dim = m + 1
    eye = np.eye(dim)
    if t <= 1 / 3:
        r = r_matrix(m, 3 * t * (1 - s))
        last = eye[m]
    elif t <= 2 / 3:
        r = r_matrix(m, 1 - s)
        last = np.asarray(ev(3 * t - 1), dtype=float)
    else:
        r = r_matrix(m, (3 - 3 * t) * (1 - s))
        last = eye[m]
    pts = [eye[i] for i in range(m - 1)] + [r @ eye[m - 1], r @ last]
    return Configuration(SpaceSpec.sphere(m, m, m + 1), np.array(pts))


def fiber_loop(m: int, kind: str = "linking", radius: float = 0.4) -> Callable[[float], np.ndarray]:
    """Loops in S^m - Q_{m-1,m}(S^m)_{b_m} based at e_{m+1}.

    ``circle``: a small circle through e_{m+1} inside the upper hemisphere
    (null-homotopic in the fiber).  ``linking``: the great circle through
    e_{m+1} and the chamber centre (1,...,1,0)/sqrt(m), which crosses the
    equator through two opposite chambers and is not null-homotopic.
    """
    dim = m + 1
    top = np.eye(dim)[m]
    if kind == "circle":
        a = np.zeros(dim)
        a[0] = 1.0
        b = np.zeros(dim)
        b[1 if m >= 2 else 0] = 1.0

        def circle(t):
            v = top + radius * ((math.cos(2 * math.pi * t) - 1) * a + math.sin(2 * math.pi * t) * b)
            return v / np.linalg.norm(v)
        return circle
    if kind == "linking":
        w = np.zeros(dim)
        w[:m] = 1 / math.sqrt(m)

        def linking(t):
            return math.cos(2 * math.pi * t) * top + math.sin(2 * math.pi * t) * w
        return linking
    raise InputError(f"unknown fiber loop {kind!r}")


# -- connecting paths --------------------------------------------------------------------

def _givens_factors(delta: np.ndarray) -> list[tuple[int, int, float]]:
    """Plane rotations (i, j, angle) whose ordered product is delta in SO(N)."""
    n = delta.shape[0]
    work = delta.copy()
    gs: list[tuple[int, int, float]] = []
    for j in range(n):
        for i in range(n - 1, j, -1):
            x, y = work[i - 1, j], work[i, j]
            if abs(y) < 1e-15:
                continue
            ang = math.atan2(y, x)
            g = plane_rotation(n, i - 1, i, ang)  # g @ work zeroes work[i, j]
            work = g @ work
            gs.append((i - 1, i, ang))
    # work is now diagonal +-1 with det +1; pair the -1 entries into pi rotations
    neg = [i for i in range(n) if work[i, i] < 0]
    if len(neg) % 2:
        raise InputError("matrix is not in SO(N)")
    # g_K ... g_1 delta = D, so delta = g_1^T ... g_K^T D
    factors = [(i, j, -ang) for i, j, ang in gs]
    factors += [(neg[k], neg[k + 1], math.pi) for k in range(0, len(neg), 2)]
    return factors


def connect(a: Configuration, b: Configuration, samples: int = 33,
            tol: Tolerance = DEFAULT_TOL) -> SampledPath:
    """A sampled path from a to b inside W_{n,n}(S^m).

    Both endpoints are retracted to orthonormal frames by Gram-Schmidt, the
    frames are completed to rotations, and the rotations are joined by a
    product of plane rotations, each turned through its angle in turn.
    """
    spec = a.spec
    if b.spec != spec:
        raise InputError("endpoints lie in different spaces")
    if spec.ambient is not Ambient.SPHERE or spec.k != spec.n or spec.n > spec.coord_dim:
        raise UnsupportedError(f"connect supports W_(n,n)(S^m), n <= m+1; got {spec}")
    if not (is_member(a, tol) and is_member(b, tol)):
        raise InputError("endpoints must be members")
    if a.allclose(b, 1e-12):
        return SampledPath((a, a), np.array([0.0, 1.0]))
    fa, fb = gram_schmidt(a, tol), gram_schmidt(b, tol)
    if spec.n == spec.coord_dim:
        if np.sign(np.linalg.det(fa.points)) != np.sign(np.linalg.det(fb.points)):
            raise UnsupportedError("frames of opposite orientation lie in different components")
        flip = np.linalg.det(fa.points) < 0
    else:
        flip = False
    ra = Frame(fa.points).rotation() if not flip else _flipped_rotation(fa.points)
    rb = Frame(fb.points).rotation() if not flip else _flipped_rotation(fb.points)
    delta = ra.T @ rb
    grid = np.linspace(0.0, 1.0, samples)
    out: list[Configuration] = [gs_retraction(a, t, tol) for t in grid]
    acc = np.eye(spec.coord_dim)
    for i, j, ang in _givens_factors(delta):
        for tau in grid[1:]:
            frame = ra @ acc @ plane_rotation(spec.coord_dim, i, j, tau * ang)
            out.append(Configuration(spec, _unflip(frame, flip)[:, : spec.n].T))
        acc = acc @ plane_rotation(spec.coord_dim, i, j, ang)
    out += [gs_retraction(b, t, tol) for t in grid[::-1][1:]]
    return SampledPath(tuple(out), np.linspace(0.0, 1.0, len(out)))


def _flipped_rotation(frame_rows: np.ndarray) -> np.ndarray:
    m = frame_rows.T.copy()
    m[:, -1] = -m[:, -1]
    return m


def _unflip(frame: np.ndarray, flip: bool) -> np.ndarray:
    if not flip:
        return frame
    f = frame.copy()
    f[:, -1] = -f[:, -1]
    return f
