"""Clifford algebra of R^N with e_i^2 = +1.

Two representations live here:

* :class:`CliffordElement` -- an exact signed basis blade +-e_S, used as the
  element type of the finite spin groups.
* :class:`Multivector` -- a dense real multivector indexed by bitmask, used
  for numerical continuation of rotation paths into the spin double cover.

A rotation by angle theta carrying e_i towards e_j is represented by the
rotor exp(-theta/2 e_i e_j), acting on vectors by v -> R v R~.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClassificationError, InputError


def blade_sign(a: int, b: int) -> int:
    """Sign of e_A e_B relative to e_{A xor B}, for bitmasks A and B.

    Counts the transpositions needed to sort the concatenated index lists;
    repeated generators cancel with e_i^2 = +1.
    """
    swaps = 0
    a >>= 1
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


def _mask(subset) -> int:
    m = 0
    for i in subset:
        if i < 1:
            raise InputError("Clifford generators are numbered from 1")
        m |= 1 << (i - 1)
    return m


def _subset(mask: int) -> frozenset[int]:
    return frozenset(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


@dataclass(frozen=True, order=True)
class CliffordElement:
    """The exact element sign * e_S."""

    sign: int
    subset: frozenset[int]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InputError("sign must be +1 or -1")
        object.__setattr__(self, "subset", frozenset(self.subset))

    @classmethod
    def one(cls) -> "CliffordElement":
        return cls(1, frozenset())

    @classmethod
    def blade(cls, *indices: int, sign: int = 1) -> "CliffordElement":
        """sign * e_{i1} e_{i2} ... with indices reordered into increasing order."""
        elem = cls(sign, frozenset())
        for i in indices:
            elem = elem * cls(1, frozenset([i]))
        return elem

    @property
    def mask(self) -> int:
        return _mask(self.subset)

    @property
    def is_even(self) -> bool:
        return len(self.subset) % 2 == 0

    def __mul__(self, other: "CliffordElement") -> "CliffordElement":
        a, b = self.mask, other.mask
        return CliffordElement(self.sign * other.sign * blade_sign(a, b), _subset(a ^ b))

    def __neg__(self) -> "CliffordElement":
        return CliffordElement(-self.sign, self.subset)

    def reverse(self) -> "CliffordElement":
        r = len(self.subset)
        return CliffordElement(self.sign * (-1 if (r * (r - 1) // 2) % 2 else 1), self.subset)

    def inverse(self) -> "CliffordElement":
        # e_S e_S = +-1, so the inverse is +-e_S
        sq = self * self
        return CliffordElement(self.sign * sq.sign, self.subset)

    def label(self) -> str:
        s = "+" if self.sign > 0 else "-"
        if not self.subset:
            return s + "1"
        return s + "e_{" + ",".join(str(i) for i in sorted(self.subset)) + "}"

    @classmethod
    def parse(cls, text: str) -> "CliffordElement":
        """Inverse of :meth:`label`; also accepts 'e34', '-e1234', '1', '-1'."""
        t = text.strip().replace(" ", "")
        sign = 1
        if t[:1] in "+-":
            sign = -1 if t[0] == "-" else 1
            t = t[1:]
        if t == "1":
            return cls(sign, frozenset())
        if not t.startswith("e"):
            raise InputError(f"cannot parse Clifford element {text!r}")
        body = t[1:].strip("_{}")
        idx = [int(x) for x in body.split(",")] if "," in body else [int(ch) for ch in body]
        return cls.blade(*idx, sign=sign)

    def __str__(self):
        return self.label()


# -- dense multivectors ---------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _product_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    size = 1 << n
    idx = np.empty((size, size), dtype=np.intp)
    sgn = np.empty((size, size))
    for a in range(size):
        for b in range(size):
            idx[a, b] = a ^ b
            sgn[a, b] = blade_sign(a, b)
    return idx, sgn


@functools.lru_cache(maxsize=None)
def _reverse_signs(n: int) -> np.ndarray:
    grades = np.array([bin(i).count("1") for i in range(1 << n)])
    return np.where((grades * (grades - 1) // 2) % 2, -1.0, 1.0)


class Multivector:
    """Dense element of Cl(R^n), coefficient i belonging to the blade with bitmask i."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: np.ndarray):
        self.n = n
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def scalar(cls, n: int, value: float = 1.0) -> "Multivector":
        c = np.zeros(1 << n)
        c[0] = value
        return cls(n, c)

    @classmethod
    def vector(cls, v) -> "Multivector":
        v = np.asarray(v, dtype=float)
        n = len(v)
        c = np.zeros(1 << n)
        for i, x in enumerate(v):
            c[1 << i] = x
        return cls(n, c)

    @classmethod
    def from_element(cls, n: int, e: CliffordElement) -> "Multivector":
        c = np.zeros(1 << n)
        c[e.mask] = e.sign
        return cls(n, c)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.n, self.coeffs * other)
        idx, sgn = _product_tables(self.n)
        w = np.outer(self.coeffs, other.coeffs) * sgn
        return Multivector(self.n, np.bincount(idx.ravel(), weights=w.ravel(),
                                               minlength=1 << self.n))

    __rmul__ = __mul__

    def __add__(self, other: "Multivector") -> "Multivector":
        return Multivector(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: "Multivector") -> "Multivector":
        return Multivector(self.n, self.coeffs - other.coeffs)

    def __neg__(self) -> "Multivector":
        return Multivector(self.n, -self.coeffs)

    def reverse(self) -> "Multivector":
        return Multivector(self.n, self.coeffs * _reverse_signs(self.n))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __repr__(self):
        terms = [f"{c:+.6g}*{CliffordElement(1, _subset(i)).label()[1:]}"
                 for i, c in enumerate(self.coeffs) if abs(c) > 1e-12]
        return "Multivector(" + (" ".join(terms) or "0") + ")"


def rotor_from_generator(a: np.ndarray) -> Multivector:
    """Rotor R = exp(-1/2 sum_{i<j} A_{ji} e_i e_j) for a skew matrix A.

    expm(A) and R represent the same rotation.  The exponential is summed as
    a power series, which converges quickly for the small steps used in path
    continuation, then renormalized so that R R~ = 1.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    b = np.zeros(1 << n)
    for i in range(n):
        for j in range(i + 1, n):
            b[(1 << i) | (1 << j)] = -0.5 * a[j, i]
    biv = Multivector(n, b)
    term = Multivector.scalar(n)
    total = Multivector.scalar(n)
    for k in range(1, 60):
        term = term * biv * (1.0 / k)
        total = total + term
        if term.norm() < 1e-18:
            break
    scale = (total * total.reverse()).coeffs[0]
    return total * (1.0 / math.sqrt(scale))


def rotation_matrix(r: Multivector) -> np.ndarray:
    """The rotation v -> R v R~ as an n x n matrix."""
    n = r.n
    rr = r.reverse()
    cols = []
    for i in range(n):
        img = r * Multivector.vector(np.eye(n)[i]) * rr
        cols.append([img.coeffs[1 << j] for j in range(n)])
    return np.array(cols).T


def nearest_element(r: Multivector, atol: float = 1e-6) -> CliffordElement:
    """Classify a multivector that should equal +-e_S exactly."""
    i = int(np.argmax(np.abs(r.coeffs)))
    c = r.coeffs[i]
    rest = np.delete(r.coeffs, i)
    if abs(abs(c) - 1) > atol or (rest.size and np.abs(rest).max() > atol):
        raise ClassificationError(f"{r!r} is not a signed basis blade")
    return CliffordElement(1 if c > 0 else -1, _subset(i))
