import json
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from confspace.errors import DegenerateInputError, InputError, SamplingError
from confspace.geometry import (
    DEFAULT_TOL,
    EXACT_TOL,
    Ambient,
    Configuration,
    SpaceSpec,
    Tolerance,
    UnsatisfiableSpecError,
    canonical_base,
    canonical_projective,
    cofactor_vector,
    exact_det,
    gram_schmidt,
    is_member,
    rank,
    sample,
)

E = np.eye(4)


def classical_gs(vectors):
    """Textbook Gram-Schmidt, used as an oracle for the QR-based version."""
    out = []
    for v in np.asarray(vectors, dtype=float):
        w = v - sum((v @ u) * u for u in out)
        out.append(w / np.linalg.norm(w))
    return np.array(out)


# -- specs -----------------------------------------------------------------------

def test_spec_rejects_n_below_k():
    with pytest.raises(InputError):
        SpaceSpec.sphere(3, 3, 2)


def test_normalized_builder_reduces_to_n_n():
    assert SpaceSpec.normalized("sphere", 3, 3, 2) == SpaceSpec.sphere(3, 2, 2)


def test_coordinate_dimension():
    assert SpaceSpec.sphere(3, 2, 2).coord_dim == 4
    assert SpaceSpec.projective(2, 2, 2).coord_dim == 3
    assert SpaceSpec.euclidean(5, 1, 3).coord_dim == 5


def test_spec_str_and_dict():
    spec = SpaceSpec.projective(3, 3, 3)
    assert str(spec) == "W_{3,3}(RP^3)"
    assert spec.to_dict() == {"ambient": "rp", "m": 3, "k": 3, "n": 3}
    assert SpaceSpec.euclidean(4, 1, 2).to_dict()["d"] == 4


def test_ambient_parse():
    assert Ambient.parse("projective") is Ambient.PROJECTIVE
    assert Ambient.parse("SPHERE") is Ambient.SPHERE
    with pytest.raises(InputError):
        Ambient.parse("torus")


def test_float_tolerance_requires_positive_eps():
    with pytest.raises(InputError):
        Tolerance(eps_rank=0.0)


# -- rank ---------------------------------------------------------------------------

def test_rank_examples():
    assert rank([E[0], E[1], E[2]]) == 3
    assert rank([E[0], E[0]]) == 1
    assert rank([E[0], E[1], E[0] + E[1]]) == 2


def test_rank_dimension_mismatch():
    with pytest.raises(InputError):
        rank([[1, 0], [1, 0, 0]])


@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=5))
def test_exact_rank_matches_sympy(rows):
    assert rank(rows, EXACT_TOL) == sympy.Matrix(rows).rank()


@given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=3, max_size=3))
def test_exact_det_matches_sympy(rows):
    assert exact_det(rows) == Fraction(int(sympy.Matrix(rows).det()))


@given(st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=2, max_size=4))
def test_exact_and_float_modes_agree(rows):
    # integer matrices: nonzero minors are at least 1 in absolute value
    assert rank(rows, EXACT_TOL) == rank(rows, DEFAULT_TOL)


def test_cofactor_vector_is_determinant_functional():
    rng = np.random.default_rng(1)
    vs = rng.standard_normal((3, 4))
    y = cofactor_vector(vs)
    for v in rng.standard_normal((5, 4)):
        assert y @ v == pytest.approx(np.linalg.det(np.vstack([vs, v])), abs=1e-12)


def test_cofactor_vector_exact():
    y = cofactor_vector(np.array([[Fraction(1), Fraction(0), Fraction(0)],
                                  [Fraction(0), Fraction(1), Fraction(0)]], dtype=object))
    assert list(y) == [0, 0, 1]


# -- membership --------------------------------------------------------------------

def sphere_config(m, k, pts):
    return Configuration.build(SpaceSpec.sphere(m, k, len(pts)), pts)


def test_membership_examples():
    assert is_member(sphere_config(2, 2, [[1, 0, 0], [0, 1, 0]]))
    assert not is_member(sphere_config(2, 2, [[1, 0, 0], [-1, 0, 0]]))
    for m in range(1, 6):
        assert is_member(canonical_base(SpaceSpec.sphere(m, m, m)))


def test_k1_euclidean_is_nonzero():
    spec = SpaceSpec.euclidean(3, 1, 2)
    assert is_member(Configuration.build(spec, [[1, 2, 3], [0, 0, 1e-3]]))
    assert not is_member(Configuration.build(spec, [[1, 2, 3], [0, 0, 0]]))


def test_exact_membership():
    spec = SpaceSpec.projective(2, 3, 4)
    c = canonical_base(spec, exact=True)
    assert c.exact and is_member(c, EXACT_TOL)
    flat = Configuration.build(SpaceSpec.projective(2, 3, 3),
                               [[1, 0, 0], [0, 1, 0], ["1/2", 3, 0]], EXACT_TOL)
    assert not is_member(flat, EXACT_TOL)


def test_exact_mode_rejects_irrational_floats():
    with pytest.raises(InputError):
        Configuration.build(SpaceSpec.euclidean(2, 1, 1), [[0.5, 1]], EXACT_TOL)


def test_sphere_points_must_be_unit():
    with pytest.raises(InputError):
        sphere_config(2, 2, [[1, 0, 0], [0, 2, 0]])


@given(st.integers(0, 10_000), st.integers(2, 4))
def test_membership_monotone_in_k(seed, m):
    c = sample(SpaceSpec.sphere(m, m + 1, m + 2), seed=seed)
    for k in range(1, m + 2):
        assert is_member(Configuration(SpaceSpec.sphere(m, k, m + 2), c.points))


@given(st.integers(0, 10_000))
def test_membership_invariant_under_rotation(seed):
    rng = np.random.default_rng(seed)
    c = sample(SpaceSpec.sphere(3, 3, 5), seed=seed)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    assert is_member(Configuration(c.spec, c.points @ q.T)) == is_member(c)


def test_projective_membership_ignores_sign():
    spec = SpaceSpec.projective(2, 2, 2)
    c = Configuration.build(spec, [[1, 1, 0], [-1, -1, 0]])
    assert not is_member(c)
    assert np.allclose(c.points[0], c.points[1])


def test_canonical_projective_forms():
    v = canonical_projective(np.array([0.0, -3.0, 4.0]))
    assert np.allclose(v, [0, 0.6, -0.8])
    w = canonical_projective(np.array([Fraction(0), Fraction(-2), Fraction(4)], dtype=object), exact=True)
    assert list(w) == [0, 1, -2]
    with pytest.raises(DegenerateInputError):
        canonical_projective(np.zeros(3))


# -- canonical base points ------------------------------------------------------------

def test_canonical_bases():
    b = canonical_base(SpaceSpec.sphere(3, 3, 3))
    assert np.array_equal(b.points, np.eye(4)[:3])
    bt = canonical_base(SpaceSpec.sphere(2, 3, 4))
    assert np.allclose(bt.points[3], np.ones(3) / math.sqrt(3))
    pf = canonical_base(SpaceSpec.projective(2, 3, 4))
    assert np.allclose(pf.points[3], np.ones(3) / math.sqrt(3))
    for c in (b, bt, pf):
        assert is_member(c)


def test_canonical_base_unsatisfiable():
    with pytest.raises(UnsatisfiableSpecError):
        canonical_base(SpaceSpec.sphere(1, 3, 3))


# -- Gram-Schmidt ------------------------------------------------------------------------

def test_gram_schmidt_examples():
    c = sphere_config(2, 2, [[1, 0, 0], [math.sqrt(2) / 2, math.sqrt(2) / 2, 0]])
    assert np.allclose(gram_schmidt(c).points, [[1, 0, 0], [0, 1, 0]], atol=1e-15)
    b = canonical_base(SpaceSpec.sphere(3, 3, 3))
    assert np.allclose(gram_schmidt(b).points, b.points, atol=0)


def test_gram_schmidt_matches_classical_oracle():
    for seed in range(100):
        c = sample(SpaceSpec.sphere(3, 4, 4), seed=seed)
        g = gram_schmidt(c).points
        assert np.abs(g @ g.T - np.eye(4)).max() <= 1e-9
        assert np.allclose(g, classical_gs(c.points), atol=1e-9)
        assert np.all(np.einsum("ij,ij->i", g, c.points) > 0)


def test_gram_schmidt_rejects_dependent():
    with pytest.raises(DegenerateInputError):
        gram_schmidt(sphere_config(2, 2, [[1, 0, 0], [1, 0, 0]]))


# -- sampling --------------------------------------------------------------------------------

def test_sample_is_deterministic():
    spec = SpaceSpec.sphere(2, 3, 3)
    assert np.array_equal(sample(spec, seed=7).points, sample(spec, seed=7).points)
    assert is_member(sample(spec, seed=7))


def test_sample_unsatisfiable():
    with pytest.raises(UnsatisfiableSpecError):
        sample(SpaceSpec.sphere(1, 3, 3), seed=0)


def test_sample_budget_exhausted():
    with pytest.raises(SamplingError):
        sample(SpaceSpec.sphere(2, 3, 3), seed=0, tol=Tolerance(eps_rank=10.0))


def test_k2_sphere_samples_are_not_antipodal():
    spec = SpaceSpec.sphere(2, 2, 2)
    for seed in range(10_000):
        p = sample(spec, seed=seed).points
        assert np.abs(p[0] - p[1]).max() > 1e-9 and np.abs(p[0] + p[1]).max() > 1e-9


# -- serialization ------------------------------------------------------------------------------

@given(st.integers(0, 1000), st.sampled_from(list(Ambient)))
def test_configuration_json_round_trip(seed, ambient):
    spec = SpaceSpec(ambient, 3, 2, 3)
    c = sample(spec, seed=seed)
    back = Configuration.from_dict(json.loads(json.dumps(c.to_dict())))
    assert back.spec == c.spec and back.allclose(c, 0)


def test_exact_configuration_round_trip():
    c = canonical_base(SpaceSpec.projective(2, 3, 4), exact=True)
    d = json.loads(json.dumps(c.to_dict()))
    assert d["points"][3] == [[1, 1], [1, 1], [1, 1]]
    back = Configuration.from_dict(d)
    assert back.exact and list(back.points[3]) == [1, 1, 1]


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3))
def test_exact_projective_canonical_first_entry_one(rows):
    assume(all(any(r) for r in rows))
    c = Configuration.build(SpaceSpec.projective(2, 1, 3), rows, EXACT_TOL)
    for p in c.points:
        assert next(x for x in p if x != 0) == 1
