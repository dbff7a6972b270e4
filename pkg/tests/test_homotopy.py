import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from confspace import homotopy as H
from confspace.arrangements import dual_graph, standard_q
from confspace.errors import InputError
from confspace.geometry import SpaceSpec

PAPER = H.Confidence.PAPER
DERIVED = H.Confidence.DERIVED_BEYOND_PAPER


def answer(spec, p):
    return H.homotopy_group(spec, p)


# -- worked examples ---------------------------------------------------------------------------

@pytest.mark.parametrize("spec,p,text,rule", [
    (SpaceSpec.projective(2, 2, 2), 1, "Q8", "R6"),
    (SpaceSpec.projective(3, 3, 3), 1, "Q8 + Z2", "R6"),
    (SpaceSpec.projective(4, 4, 4), 1, "Q8*D8", "R6"),
    (SpaceSpec.sphere(3, 3, 4), 1, "Free(7) + Z2", "R3"),
    (SpaceSpec.sphere(3, 3, 4), 2, "1", "R3"),
    (SpaceSpec.sphere(3, 3, 4), 3, "pi_3(S^2) + pi_3(S^2)", "R3"),
    (SpaceSpec.sphere(3, 3, 4), 6, "pi_6(S^2) + pi_6(S^2)", "R3"),
    (SpaceSpec.sphere(2, 3, 4), 1, "pi_1(V_{3,3})", "R4"),
    (SpaceSpec.sphere(3, 4, 5), 2, "pi_2(V_{4,4})", "R4"),
    (SpaceSpec.sphere(5, 2, 2), 1, "1", "R2"),
    (SpaceSpec.sphere(3, 3, 3), 1, "Z2", "R2"),
    (SpaceSpec.euclidean(3, 1, 2), 2, "pi_2(R^3 - {0}) + pi_2(R^3 - {0})", "R1"),
    (SpaceSpec.sphere(2, 1, 2), 2, "pi_2(S^2) + pi_2(S^2)", "R1"),
    (SpaceSpec.projective(1, 1, 1), 1, "pi_1(RP^1)", "R1"),
])
def test_worked_examples(spec, p, text, rule):
    a = answer(spec, p)
    assert (a.text, a.provenance.rule) == (text, rule)


def test_unmatched_and_special_rules():
    assert answer(SpaceSpec.sphere(1, 3, 3), 1).provenance.rule == "EMPTY"
    fadell = answer(SpaceSpec.projective(4, 2, 5), 1)
    assert fadell.provenance.rule == "FADELL" and isinstance(fadell.expr, H.Unknown)
    r3 = answer(SpaceSpec.sphere(1, 1, 2), 1)
    assert r3.provenance.rule == "R1"
    odd = answer(SpaceSpec.sphere(3, 3, 6), 1)
    assert odd.text == "Unknown(no paper rule)" and odd.provenance.confidence is DERIVED
    assert answer(SpaceSpec.projective(5, 5, 5), 1).provenance.rule == "UNMATCHED"


def test_euclidean_retracts_to_sphere():
    a = answer(SpaceSpec.euclidean(4, 3, 4), 1)
    assert a.provenance.rule == "RETRACT" and a.text == "Free(7) + Z2"
    assert a.provenance.via == ("R3",)


def test_rejects_nonpositive_p():
    with pytest.raises(InputError):
        answer(SpaceSpec.sphere(3, 3, 4), 0)
    with pytest.raises(InputError):
        H.stiefel_pi(4, 3, 0)


# -- Stiefel table ----------------------------------------------------------------------------

def test_stiefel_table():
    assert H.stiefel_pi(4, 3, 1).expr == H.Zmod(2)
    assert H.stiefel_pi(4, 3, 2).expr == H.Trivial()
    assert H.stiefel_pi(4, 3, 4).text == "pi_4(S^2) + pi_4(S^2)"
    assert H.stiefel_pi(5, 4, 1).expr == H.Zmod(2)
    assert H.stiefel_pi(6, 2, 1).expr == H.Trivial()
    assert H.stiefel_pi(3, 1, 2).expr == H.PiSphere(2, 2)
    leaf = H.stiefel_pi(5, 2, 2)
    assert leaf.expr == H.PiStiefel(5, 2, 2) and leaf.text == "pi_2(V_{5,2})"
    assert isinstance(H.stiefel_pi(5, 4, 2).expr, H.PiStiefel)
    assert all(H.stiefel_pi(N, n, p).provenance.confidence is PAPER
               for N in range(2, 7) for n in range(1, N + 1) for p in (1, 2, 3))


# -- properties -----------------------------------------------------------------------------

@pytest.mark.parametrize("m", range(2, 8))
def test_abelian_rule_order_matches_deck_group(m):
    for n in range(1, m):
        a = answer(SpaceSpec.projective(m, n, n), 1)
        assert a.provenance.rule == "R6"
        assert H.group_order(a.expr) == 2 ** n


@given(st.integers(2, 6), st.integers(1, 7), st.integers(2, 8))
def test_r5_and_r2_compose(m, n, p):
    n = min(n, m + 1)
    a = answer(SpaceSpec.projective(m, n, n), p)
    assert a.provenance.rule == "R5"
    assert a.expr == H.stiefel_pi(m + 1, n, p).expr


@pytest.mark.parametrize("m", range(2, 7))
def test_fiber_rank_agrees_with_arrangement(m):
    from confspace.arrangements import free_rank

    assert H.fiber_pi1_rank(m) == free_rank(dual_graph(standard_q(m))) == 2 ** m - 1
    conf = H.fiber_pi(m, 1).provenance.confidence
    assert conf is (PAPER if m == 3 else DERIVED)
    assert H.fiber_pi(m, 3).expr == H.Trivial()


def test_fiber_rank_rejects_small_m():
    with pytest.raises(InputError):
        H.fiber_pi1_rank(1)


leaves = st.sampled_from([H.Z(), H.Zmod(2), H.Zmod(3), H.Q8(), H.D8(), H.Free(3), H.Trivial(),
                          H.PiSphere(2, 4), H.PiStiefel(5, 2, 3)])
sums = st.recursive(leaves, lambda inner: st.lists(inner, min_size=1, max_size=4)
                    .map(lambda ts: H.DirectSum(tuple(ts))), max_leaves=10)


@given(sums)
def test_normalize_idempotent(e):
    once = H.normalize(e)
    assert H.normalize(once) == once


@given(st.lists(leaves, min_size=1, max_size=6), st.randoms())
def test_normalize_order_insensitive(terms, rnd):
    shuffled = list(terms)
    rnd.shuffle(shuffled)
    assert H.normalize(H.DirectSum(tuple(terms))) == H.normalize(H.DirectSum(tuple(shuffled)))


def test_normalize_examples():
    assert H.normalize(H.Free(0)) == H.Trivial()
    assert H.normalize(H.Free(1)) == H.Z()
    assert H.direct_sum(H.Zmod(2), H.Trivial(), H.Free(7)).render() == "Free(7) + Z2"
    assert H.normalize(H.FreeProduct((H.Z(), H.Z(), H.Free(3)))).render() == "Free(5)"
    assert H.normalize(H.DirectSum((H.Trivial(),))) == H.Trivial()
    assert H.group_order(H.CentralProduct(H.Q8(), H.D8())) == 32
    assert H.group_order(H.direct_sum(H.Z(), H.Zmod(2))) is None


# -- JSON --------------------------------------------------------------------------------------

def test_query_json_format():
    got = H.query("rp", 3, 3, 3, 1)
    assert got == {"query": {"ambient": "rp", "m": 3, "k": 3, "n": 3, "p": 1},
                   "answer": "Q8 + Z2", "rule": "R6", "anchor": "Q_8⊕Z_2, k=n=m=3",
                   "confidence": "PAPER"}
    assert json.loads(json.dumps(got)) == got


def test_query_normalizes_n_below_k():
    assert H.query("sphere", 3, 3, 2, 1)["query"] == {"ambient": "sphere", "m": 3, "k": 2, "n": 2,
                                                       "p": 1}
    assert H.query("euclidean", 4, 3, 4, 1)["query"]["d"] == 4
