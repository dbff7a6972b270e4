"""The acceptance checks.

Each check returns a :class:`CheckResult`; :func:`run_all` runs them in order
under one seed.  ``level="full"`` multiplies every sample count by 10.
Reports exclude wall-clock times so that a fixed seed gives identical bytes;
times are kept on the result objects for callers that want them.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import arrangements as arr
from . import bundle, groups, homotopy, paths
from .clifford import CliffordElement
from .geometry import (
    Ambient,
    Configuration,
    SpaceSpec,
    canonical_base,
    gram_schmidt,
    is_member,
    sample,
)

log = logging.getLogger(__name__)

LEVELS = {"desk": 1, "full": 10}


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    limit: float = 0.0
    seconds: float = 0.0

    @property
    def within_limit(self) -> bool:
        return self.seconds < self.limit

    def line(self, timed: bool = True) -> str:
        ok = self.passed and (self.within_limit or not timed)
        status = "PASS" if ok else "FAIL"
        note = "" if self.passed else ", check failed"
        if timed and self.passed and not self.within_limit:
            note = ", over time limit"
        return f"[{status}] {self.number:2d} {self.name} ({self.seconds:.2f}s, limit {self.limit:g}s{note})"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "details": self.details, "time_limit_s": self.limit}


CHECKS: list[tuple[int, str, float, Callable]] = []


def check(number: int, name: str, limit: float):
    def deco(fn):
        CHECKS.append((number, name, limit, fn))
        return fn
    return deco


def _unit_rows(rng, n, dim):
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1)[:, None]


# -- 1 ----------------------------------------------------------------------------------------

def _pairwise_oracle(batch: np.ndarray, antipodal: bool, atol: float = 1e-7) -> np.ndarray:
    """Per configuration: no two points equal (or opposite), by coordinate distance."""
    diff = np.abs(batch[:, :, None, :] - batch[:, None, :, :]).max(axis=-1)
    if antipodal:
        diff = np.minimum(diff, np.abs(batch[:, :, None, :] + batch[:, None, :, :]).max(axis=-1))
    n = batch.shape[1]
    iu = np.triu_indices(n, 1)
    return np.all(diff[:, iu[0], iu[1]] >= atol, axis=1)


def _inject(rng, batch: np.ndarray, zero: bool) -> np.ndarray:
    """Overwrite some points with exact copies, negatives or zeros of others."""
    batch = batch.copy()
    count, n, _ = batch.shape
    roll = rng.random(count)
    i = rng.integers(0, n, count)
    j = (i + rng.integers(1, n, count)) % n
    rows = np.arange(count)
    copy, neg = roll < 0.25, (roll >= 0.25) & (roll < 0.5)
    batch[rows[copy], j[copy]] = batch[rows[copy], i[copy]]
    batch[rows[neg], j[neg]] = -batch[rows[neg], i[neg]]
    if zero:
        z = (roll >= 0.5) & (roll < 0.6)
        batch[rows[z], i[z]] = 0.0
    return batch


@check(1, "membership equivalences", 5.0)
def check_membership(seed: int, scale: int) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    count = 10_000 * scale
    cases = {
        "sphere k=2": (SpaceSpec.sphere(2, 2, 4), lambda b: _pairwise_oracle(b, True)),
        "projective k=2": (SpaceSpec.projective(2, 2, 4), lambda b: _pairwise_oracle(b, True)),
        "euclidean k=1": (SpaceSpec.euclidean(3, 1, 4),
                          lambda b: np.all(np.abs(b).max(axis=-1) > 0, axis=1)),
    }
    details, ok = {}, True
    for label, (spec, oracle) in cases.items():
        batch = rng.standard_normal((count, spec.n, spec.coord_dim))
        if spec.ambient is not Ambient.EUCLIDEAN:
            batch /= np.linalg.norm(batch, axis=-1, keepdims=True)
        batch = _inject(rng, batch, zero=spec.ambient is Ambient.EUCLIDEAN)
        expected = oracle(batch)
        got = np.array([is_member(Configuration.build(spec, pts)) for pts in batch])
        mismatches = int(np.count_nonzero(got != expected))
        members = int(got.sum())
        details[label] = {"samples": count, "members": members, "mismatches": mismatches}
        ok &= mismatches == 0 and 0 < members < count
    return ok, details


# -- 2 -------------------------------------------------------------------------------------------

@check(2, "Gram-Schmidt retraction", 10.0)
def check_gs(seed: int, scale: int) -> tuple[bool, dict]:
    m, ts = 4, np.linspace(0, 1, 101)
    details, ok = {}, True
    for n in (2, 3, 4, 5):
        spec = SpaceSpec.sphere(m, n, n)
        bad_member, ortho_err, fixed_err = 0, 0.0, 0.0
        for i in range(100 * scale):
            c = sample(spec, seed=[seed, n, i])
            for t in ts:
                bad_member += not is_member(bundle.gs_retraction(c, t))
            end = bundle.gs_retraction(c, 1.0).points
            ortho_err = max(ortho_err, np.abs(end @ end.T - np.eye(n)).max())
            frame = gram_schmidt(c)
            for t in ts[::10]:
                fixed_err = max(fixed_err, np.abs(bundle.gs_retraction(frame, t).points
                                                  - frame.points).max())
        details[f"n={n}"] = {"non_members": bad_member, "orthonormality_error": float(ortho_err),
                             "fixed_point_error": float(fixed_err)}
        ok &= bad_member == 0 and ortho_err <= 1e-9 and fixed_err <= 1e-12
    return ok, details


# -- 3 -------------------------------------------------------------------------------------------

@check(3, "cross-sections", 5.0)
def check_sections(seed: int, scale: int) -> tuple[bool, dict]:
    details, ok = {}, True
    for m in (2, 3, 4):
        spec = SpaceSpec.sphere(m, m, m)
        e_sum = e_orth = e_perp = e_frame = 0.0
        neg_det = 0
        for i in range(200 * scale):
            c = sample(spec, seed=[seed, m, i])
            s1, s2 = bundle.section_sum(c), bundle.section_orth(c)
            e_sum = max(e_sum, np.abs(bundle.project(s1).points - c.points).max())
            e_orth = max(e_orth, np.abs(bundle.project(s2).points - c.points).max())
            y = s2.points[-1]
            e_perp = max(e_perp, np.abs(c.points @ y).max())
            neg_det += np.linalg.det(s2.points) <= 0
            e_frame = max(e_frame, np.abs(y - bundle.complete_frame(c)).max())
        details[f"m={m}"] = {"sum_error": float(e_sum), "orth_error": float(e_orth),
                             "orthogonality_error": float(e_perp),
                             "nonpositive_determinants": int(neg_det),
                             "complete_frame_error": float(e_frame)}
        ok &= (e_sum <= 1e-12 and e_orth <= 1e-12 and e_perp <= 1e-9
               and neg_det == 0 and e_frame <= 1e-12)
    return ok, details


# -- 4 ---------------------------------------------------------------------------------------------

@check(4, "trivialization round trip", 5.0)
def check_trivialization(seed: int, scale: int) -> tuple[bool, dict]:
    m = 3
    spec = SpaceSpec.sphere(m, m, m)
    q0 = arr.QSpec(canonical_base(spec), m - 1)
    rng = np.random.default_rng([seed, 4])
    err, hits = 0.0, 0
    count = 100 * scale
    for i in range(count):
        x = sample(spec, seed=[seed, 4, i])
        while True:
            y = _unit_rows(rng, 1, m + 1)[0]
            if not arr.q_contains(y, q0):
                break
        z = bundle.trivialize(x, y)
        hits += arr.q_contains(z, arr.QSpec(x, m - 1))
        err = max(err, np.abs(bundle.untrivialize(x, z) - y).max())
    return err <= 1e-9 and hits == 0, {"samples": count, "round_trip_error": float(err),
                                       "images_in_Q": int(hits)}


# -- 5 ------------------------------------------------------------------------------------------------

@check(5, "arrangement graph at m=3", 1.0)
def check_arrangement(seed: int, scale: int) -> tuple[bool, dict]:
    q = arr.standard_q(3)
    g, dg = arr.graph_model(q), arr.dual_graph(q)
    rank = arr.free_rank(dg)
    d = {"graph_vertices": g.num_vertices, "graph_edges": g.num_edges,
         "dual_vertices": dg.num_vertices, "dual_edges": dg.num_edges, "free_rank": rank}
    ok = (g.num_vertices, g.num_edges, dg.num_vertices, dg.num_edges, rank) == (6, 12, 2, 8, 7)
    return ok, d


# -- 6 ---------------------------------------------------------------------------------------------------

@check(6, "complement component counts", 10.0)
def check_components(seed: int, scale: int) -> tuple[bool, dict]:
    details, ok = {}, True
    for m in range(1, 6):
        q = arr.QSpec(canonical_base(SpaceSpec.sphere(m, m + 1, m + 1)), m)
        exact = arr.count_components_complement(q)
        cells = set(arr.complement_cells(q))
        hits = arr.sample_cells(q, 10_000 * scale, seed=[seed, 6, m])
        agree = set(hits) == cells
        details[f"m={m}"] = {"exact": exact, "sampled": len(hits), "expected": 2 ** (m + 1),
                             "sampled_cells_match": agree}
        ok &= exact == 2 ** (m + 1) and agree
    return ok, details


# -- 7 ------------------------------------------------------------------------------------------------------

@check(7, "fundamental groups", 2.0)
def check_groups(seed: int, scale: int) -> tuple[bool, dict]:
    want = {2: (8, None, "Q8"), 3: (16, {2: 3, 4: 12}, "Q8 + Z2"),
            4: (32, {2: 11, 4: 20}, "Q8*D8")}
    details, ok = {}, True
    for m, (order, stats, name) in want.items():
        g = groups.pi1_extension_group(m)
        st = groups.order_statistics(g)
        ident = groups.identify(g).label
        details[f"m={m}"] = {"order": g.order, "orders": {str(k): v for k, v in st.items()},
                             "name": ident}
        ok &= g.order == order and ident == name
        if stats is not None:
            ok &= all(st.get(k) == v for k, v in stats.items())
    return ok, details


# -- 8 ---------------------------------------------------------------------------------------------------------

def beta_images(samples: int = 17) -> dict[str, CliffordElement]:
    """Generator images obtained by spin-lifting the delta paths."""
    out = {}
    for i in (1, 2, 3):
        loop = paths.NamedLoop(f"delta{i}")
        out[f"b{i}"] = paths.spin_lift(paths.loop_path(loop, samples))
    return out


@check(8, "presentation of the order-16 group", 1.0)
def check_presentation(seed: int, scale: int) -> tuple[bool, dict]:
    g = groups.pi1_extension_group(3)
    images = beta_images()
    rep = groups.check_presentation(g, images, groups.BETA_RELATIONS)
    d = rep.to_dict()
    d["images"] = {k: v.label() for k, v in images.items()}
    expected = {"b1": "+e_{3,4}", "b2": "+e_{2,3}", "b3": "+e_{1,2,3,4}"}
    return rep.ok and d["images"] == expected, d


# -- 9 ---------------------------------------------------------------------------------------------------------------

@check(9, "lifting and monodromy", 10.0)
def check_lifting(seed: int, scale: int) -> tuple[bool, dict]:
    details, ok = {}, True
    for m in (2, 3, 4):
        p = paths.loop_path(paths.NamedLoop("alpha", m), 129)
        once, twice = paths.spin_lift(p), paths.spin_lift(p.concat(p))
        details[f"alpha:{m}"] = {"lift": once.label(), "square": twice.label()}
        ok &= once == -CliffordElement.one() and twice == CliffordElement.one()
    want = {"beta1": "(+,+,-)", "beta2": "(+,-,-)", "beta3": "(-,-,-)"}
    loops = {name: paths.loop_path(paths.NamedLoop(name), 65) for name in want}
    mono = {name: paths.monodromy(p) for name, p in loops.items()}
    details["monodromy"] = {k: str(v) for k, v in mono.items()}
    ok &= details["monodromy"] == want
    rng = np.random.default_rng([seed, 9])
    failures = 0
    names = list(loops)
    for _ in range(50 * scale):
        word = [names[i] for i in rng.integers(0, 3, size=int(rng.integers(2, 5)))]
        path = loops[word[0]]
        expect = mono[word[0]]
        for w in word[1:]:
            path = path.concat(loops[w])
            expect = expect * mono[w]
        failures += paths.monodromy(path) != expect
    details["concatenations"] = {"count": 50 * scale, "failures": failures}
    return ok and failures == 0, details


# -- 10 ----------------------------------------------------------------------------------------------------------------

def _inclusion_loop(x, m: int, t: float) -> np.ndarray:
    """The loop i(x) run on [1/3, 2/3], constant at b_{m+1} elsewhere."""
    eye = np.eye(m + 1)
    last = x(3 * t - 1) if 1 / 3 <= t <= 2 / 3 else eye[m]
    return np.vstack([eye[:m], last])


def sampled_fiber_loop(m: int, kind: str, samples: int = 513) -> paths.SampledPath:
    """A fiber loop known only through its samples (evaluated by interpolation)."""
    f = paths.SampledPath.from_function(paths.fiber_loop(m, kind), samples)
    return paths.SampledPath(f.samples, f.times)


@check(10, "homotopy H containment", 10.0)
def check_homotopy(seed: int, scale: int) -> tuple[bool, dict]:
    m = 3
    spec = SpaceSpec.sphere(m, m, m + 1)
    ns, nt = 101, 301 * scale
    details, ok = {}, True
    for kind in ("linking", "circle"):
        x = sampled_fiber_loop(m, kind)
        bad = 0
        for s in np.linspace(0, 1, ns):
            for t in np.linspace(0, 1, nt):
                h = paths.homotopy_H(float(s), float(t), x, m)
                bad += h.spec != spec or not is_member(h)
        err = max(np.abs(paths.homotopy_H(1.0, float(t), x, m).points
                         - _inclusion_loop(x.at, m, float(t))).max()
                  for t in np.linspace(0, 1, nt))
        details[kind] = {"grid": [ns, nt], "non_members": bad, "endpoint_error": float(err)}
        ok &= bad == 0 and err <= 1e-12
    return ok, details


# -- 11 --------------------------------------------------------------------------------------------------------------------

def calculator_cases() -> list[tuple[SpaceSpec, int, str]]:
    cases = [
        (SpaceSpec.projective(2, 2, 2), 1, "Q8"),
        (SpaceSpec.projective(3, 3, 3), 1, "Q8 + Z2"),
        (SpaceSpec.projective(4, 4, 4), 1, "Q8*D8"),
        (SpaceSpec.sphere(3, 3, 4), 1, "Free(7) + Z2"),
        (SpaceSpec.sphere(3, 3, 4), 2, "1"),
    ]
    for m in range(2, 7):
        for n in range(1, m):
            cases.append((SpaceSpec.projective(m, n, n), 1, " + ".join(["Z2"] * n)))
    for p in (3, 4, 5, 7):
        cases.append((SpaceSpec.sphere(3, 3, 4), p, f"pi_{p}(S^2) + pi_{p}(S^2)"))
    for m in (1, 2, 3, 4, 5):
        for p in (1, 2, 3):
            cases.append((SpaceSpec.sphere(m, m + 1, m + 2), p, f"pi_{p}(V_{{{m + 1},{m + 1}}})"))
    return cases


@check(11, "calculator regression", 1.0)
def check_calculator(seed: int, scale: int) -> tuple[bool, dict]:
    wrong = []
    for spec, p, want in calculator_cases():
        ans = homotopy.homotopy_group(spec, p)
        if ans.text != want or ans.provenance.confidence is not homotopy.Confidence.PAPER:
            wrong.append({"space": str(spec), "p": p, "expected": want, "got": ans.text,
                          "confidence": ans.provenance.confidence.value})
    return not wrong, {"cases": len(calculator_cases()), "mismatches": wrong}


# -- driver ---------------------------------------------------------------------------------------------------------------------

def run_check(number: int, seed: int = 0, level: str = "desk") -> CheckResult:
    scale = LEVELS[level]
    for num, name, limit, fn in CHECKS:
        if num == number:
            t0 = time.perf_counter()
            try:
                passed, details = fn(seed, scale)
            except Exception as exc:  # a crash is a failed criterion, reported as such
                log.exception("check %d raised", number)
                passed, details = False, {"error": f"{type(exc).__name__}: {exc}"}
            res = CheckResult(num, name, bool(passed), details, limit,
                              time.perf_counter() - t0)
            log.info(res.line())
            return res
    raise KeyError(number)


def run_all(seed: int = 0, level: str = "desk") -> list[CheckResult]:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}")
    return [run_check(num, seed, level) for num, *_ in CHECKS]


def report(results: list[CheckResult], seed: int, level: str) -> dict:
    return {"seed": seed, "level": level,
            "passed": all(r.passed for r in results),
            "criteria": [r.to_dict() for r in results]}
