import json
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from confspace import paths as P
from confspace.clifford import CliffordElement
from confspace.errors import InputError, MeshError, UnsupportedError
from confspace.geometry import Configuration, SpaceSpec, canonical_base, is_member, sample

E = np.eye(4)


def quaternion_lift_w(mats):
    """Oracle for SO(3): continue unit quaternions by keeping consecutive dots positive."""
    qs = Rotation.from_matrix(np.asarray(mats)).as_quat()  # (x, y, z, w)
    q = qs[0] * np.sign(qs[0][3] or 1.0)
    for nxt in qs[1:]:
        q = nxt if q @ nxt > 0 else -nxt
    return q[3]


# -- loops ----------------------------------------------------------------------------

def test_eval_loop_examples():
    alpha = P.NamedLoop("alpha", 3)
    assert np.allclose(P.eval_loop(alpha, 0).points, E[:3])
    assert np.allclose(P.eval_loop(alpha, 0.25).points[2], [0, 0, 0, -1], atol=1e-15)
    d3 = P.NamedLoop("delta3")
    assert np.allclose(P.eval_loop(d3, 1).points, -E[:3], atol=1e-15)
    with pytest.raises(InputError):
        P.eval_loop(alpha, 1.5)


def test_loop_parsing_and_labels():
    assert P.NamedLoop.parse("ALPHA(4)") == P.NamedLoop("alpha", 4)
    assert P.NamedLoop.parse("beta2").label == "beta2"
    assert P.NamedLoop.parse("r:2").spec == SpaceSpec.sphere(2, 3, 3)
    with pytest.raises(InputError):
        P.NamedLoop("delta1", 4)
    with pytest.raises(ValueError):
        P.NamedLoop.parse("gamma")


@pytest.mark.parametrize("name", ["r:2", "alpha:3", "alpha:5", "delta1", "delta3", "beta2"])
def test_named_loops_stay_in_space(name):
    loop = P.NamedLoop.parse(name)
    assert P.check_in_space(P.loop_path(loop, 129))


def test_beta_loops_are_closed_deltas_are_not():
    for i in (1, 2, 3):
        assert P.loop_path(P.NamedLoop(f"beta{i}"), 17).closed
        assert not P.loop_path(P.NamedLoop(f"delta{i}"), 17).closed


# -- covering lifts -----------------------------------------------------------------------

@pytest.mark.parametrize("name,signs", [("beta1", (1, 1, -1)), ("beta2", (1, -1, -1)),
                                        ("beta3", (-1, -1, -1))])
def test_beta_monodromy(name, signs):
    path = P.loop_path(P.NamedLoop(name), 65)
    assert P.monodromy(path).signs == signs
    end = P.cover_lift(path).end.points
    assert np.allclose(end, np.array(signs)[:, None] * E[:3], atol=1e-12)


def test_monodromy_is_a_homomorphism():
    loops = {i: P.loop_path(P.NamedLoop(f"beta{i}"), 33) for i in (1, 2, 3)}
    for i in loops:
        for j in loops:
            both = loops[i].concat(loops[j])
            assert P.monodromy(both) == P.monodromy(loops[i]) * P.monodromy(loops[j])


def test_cover_lift_from_other_sheet():
    path = P.loop_path(P.NamedLoop("beta1"), 33)
    start = Configuration(SpaceSpec.sphere(3, 3, 3), np.diag([-1.0, 1, 1, 1])[:3])
    end = P.cover_lift(path, start).end.points
    assert np.allclose(end, np.diag([-1.0, 1, -1, 1])[:3], atol=1e-12)
    with pytest.raises(InputError):
        P.cover_lift(path, canonical_base(SpaceSpec.sphere(3, 3, 4)))


def test_coarse_sampled_path_raises_mesh_error():
    coarse = P.loop_path(P.NamedLoop("beta3"), 3)
    bare = P.SampledPath(coarse.samples, coarse.times)
    with pytest.raises(MeshError):
        P.cover_lift(bare)
    # with the evaluator attached, the same grid is refined automatically
    assert P.monodromy(coarse).signs == (-1, -1, -1)


def test_monodromy_needs_closed_loop():
    with pytest.raises(InputError):
        P.monodromy(P.SampledPath.from_function(lambda t: P.NamedLoop("beta1")(t / 2), 9))


# -- spin lifts ----------------------------------------------------------------------------

@pytest.mark.parametrize("m", [2, 3, 4])
def test_alpha_lifts_to_minus_one(m):
    alpha = P.loop_path(P.NamedLoop("alpha", m), 65)
    assert P.spin_lift(alpha) == -CliffordElement.one()
    assert P.spin_lift(alpha.concat(alpha)) == CliffordElement.one()
    assert P.spin_lift(P.rotation_path(P.NamedLoop("r", m), 65)) == -CliffordElement.one()


@pytest.mark.parametrize("i,label", [(1, "+e_{3,4}"), (2, "+e_{2,3}"), (3, "+e_{1,2,3,4}")])
def test_delta_lifts(i, label):
    assert P.spin_lift(P.loop_path(P.NamedLoop(f"delta{i}"), 17)).label() == label


@pytest.mark.parametrize("samples", [5, 17, 257])
def test_spin_lift_mesh_invariance(samples):
    assert P.spin_lift(P.loop_path(P.NamedLoop("delta3"), samples)).label() == "+e_{1,2,3,4}"


def _skew(rng, n):
    a = rng.standard_normal((n, n))
    return a - a.T


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_spin_lift_matches_quaternion_oracle(seed):
    rng = np.random.default_rng(seed)
    a, b = _skew(rng, 3), _skew(rng, 3)
    mats = [scipy.linalg.expm(t * a) @ scipy.linalg.expm(t * t * b) for t in np.linspace(0, 1, 201)]
    w = quaternion_lift_w(mats)
    path = P.SampledPath(tuple(mats), np.linspace(0, 1, 201))
    rotor = P.spin_rotor(path)
    # both continued lifts have scalar part cos(theta/2) with a consistent sign
    assert rotor.coeffs[0] == pytest.approx(w, abs=1e-6)


def test_spin_lift_of_full_turn_matches_quaternion_oracle():
    mats = [P.r_matrix(2, t) for t in np.linspace(0, 1, 101)]
    assert quaternion_lift_w(mats) == pytest.approx(-1)
    assert P.spin_lift(P.SampledPath(tuple(mats), np.linspace(0, 1, 101))) == -CliffordElement.one()


@given(st.integers(0, 10_000))
@settings(max_examples=8)
def test_path_times_reverse_is_trivial(seed):
    a = sample(SpaceSpec.sphere(3, 3, 3), seed=seed)
    b = sample(SpaceSpec.sphere(3, 3, 3), seed=seed + 1)
    path = P.connect(a, b, samples=9)
    assert P.spin_lift(path.concat(path.reverse()), relative=True) == CliffordElement.one()


def test_spin_lift_needs_identity_start():
    loop = P.NamedLoop("delta1")
    late = P.SampledPath.from_function(lambda t: loop(0.5 + t / 2), 9)
    with pytest.raises(InputError):
        P.spin_lift(late)
    rotor = P.spin_rotor(late, relative=True)
    assert rotor.coeffs[0] == pytest.approx(math.sqrt(0.5))
    assert abs(rotor.coeffs[0b1100]) == pytest.approx(math.sqrt(0.5))


def test_frame_matrix_rejects_non_frames():
    with pytest.raises(InputError):
        P.frame_matrix(canonical_base(SpaceSpec.sphere(3, 2, 2)))


# -- the homotopy H ------------------------------------------------------------------------------

def test_homotopy_H_examples():
    x = P.fiber_loop(3)
    h0 = P.homotopy_H(1, 0.5, x, 3).points
    assert np.allclose(h0, np.vstack([E[:3], x(0.5)]))
    for s in (0.0, 0.3, 1.0):
        assert np.allclose(P.homotopy_H(s, 0.0, x, 3).points, E)
        assert np.allclose(P.homotopy_H(s, 1.0, x, 3).points, E, atol=1e-12)
    with pytest.raises(InputError):
        P.homotopy_H(-0.1, 0.5, x, 3)


@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from(["linking", "circle"]), st.integers(2, 5))
def test_homotopy_H_stays_in_space(s, t, kind, m):
    assert is_member(P.homotopy_H(s, t, P.fiber_loop(m, kind), m))


def test_fiber_loops_are_based_at_top_vector():
    for kind in ("linking", "circle"):
        x = P.fiber_loop(3, kind)
        assert np.allclose(x(0), E[3]) and np.allclose(x(1), E[3])
    with pytest.raises(InputError):
        P.fiber_loop(3, "knot")


# -- connect ----------------------------------------------------------------------------------------

@settings(max_examples=20)
@given(st.integers(0, 10_000), st.sampled_from([(2, 2), (3, 3), (3, 4), (4, 4)]))
def test_connect_joins_endpoints_in_space(seed, mn):
    m, n = mn
    spec = SpaceSpec.sphere(m, n, n)
    a, b = sample(spec, seed=seed), sample(spec, seed=seed + 7)
    if n == m + 1 and np.linalg.det(a.points) * np.linalg.det(b.points) < 0:
        with pytest.raises(UnsupportedError):
            P.connect(a, b)
        return
    path = P.connect(a, b)
    assert path.start.allclose(a, 1e-12) and path.end.allclose(b, 1e-9)
    assert P.check_in_space(path)


def test_connect_examples():
    b = canonical_base(SpaceSpec.sphere(2, 2, 2))
    assert len(P.connect(b, b)) == 2
    with pytest.raises(UnsupportedError):
        P.connect(canonical_base(SpaceSpec.sphere(3, 2, 3)), canonical_base(SpaceSpec.sphere(3, 2, 3)))
    flipped = Configuration(SpaceSpec.sphere(2, 3, 3), np.diag([1.0, 1, -1]))
    with pytest.raises(UnsupportedError):
        P.connect(canonical_base(SpaceSpec.sphere(2, 3, 3)), flipped)


# -- serialization ---------------------------------------------------------------------------------

def test_sampled_path_round_trip():
    path = P.loop_path(P.NamedLoop("beta2"), 9)
    data = json.loads(json.dumps(path.to_list()))
    back = P.SampledPath.from_list(data)
    assert np.array_equal(back.times, path.times)
    assert all(a.allclose(b, 0) for a, b in zip(back.samples, path.samples))
    assert P.monodromy(P.SampledPath.from_list(P.loop_path(P.NamedLoop("beta2"), 65).to_list())).signs \
        == (1, -1, -1)


def test_sampled_path_validation():
    with pytest.raises(InputError):
        P.SampledPath((E, E), np.array([0.0, 0.5]))
    with pytest.raises(InputError):
        P.SampledPath((E,), np.array([0.0, 1.0]))


def test_interpolated_evaluation():
    f = P.fiber_loop(3)
    bare = P.SampledPath(tuple(f(t) for t in np.linspace(0, 1, 513)), np.linspace(0, 1, 513))
    for t in (0.1, 0.37, 0.9):
        assert np.abs(bare.at(t) - f(t)).max() < 1e-4
        assert np.linalg.norm(bare.at(t)) == pytest.approx(1)
    assert math.isclose(bare.mesh, 2 * math.sin(math.pi / 512), rel_tol=0.5)
