"""Acceptance suite: one test per headline criterion, each with its runtime budget.

Every test records a PASS/FAIL line (shown in the terminal summary and
printed to stdout) with the elapsed time.
"""
import random
import time
from contextlib import contextmanager
from fractions import Fraction as F
from math import comb

from conftest import ACCEPTANCE_LINES
from momentlab.arith import Subgroup, contains, rational_rank
from momentlab.cantor import CylinderFunction, EmbeddingCertificate, build_embedding, in_lattice, verify_embedding
from momentlab.errors import PrecisionExhausted
from momentlab.measures import Measure, lp_feasible, mixed_moment, moments_of, random_atomic, random_vector
from momentlab.moments import extension_interval, iterated_difference, membership
from momentlab.pascal import build_table, verify_hom
from momentlab.perturb import PerturbationRequest, check_result, perturb, perturb_independent, perturb_prefix

MEASURES = [
    Measure.lebesgue(),
    Measure.beta(2, 3),
    Measure.delta(F(1, 2)),
    Measure.atomic([(F(1, 4), F(1, 2)), (F(3, 4), F(1, 2))]),
]


@contextmanager
def criterion(number, title, budget):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        in_time = elapsed < budget
        status = "PASS" if ok and in_time else "FAIL"
        note = "" if in_time else f" (over the {budget:g} s budget)"
        line = f"{status} criterion {number}: {title} [{elapsed:.2f} s / {budget:g} s]{note}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    assert in_time, f"criterion {number} took {elapsed:.2f} s, budget {budget} s"


def test_criterion_1_difference_identity():
    with criterion(1, "iterated differences equal mixed moments, n <= 12, exact", 1):
        for mu in MEASURES:
            t = moments_of(mu, 12)
            for n in range(13):
                for k in range(n + 1):
                    assert iterated_difference(t, n - k, k) == mixed_moment(mu, n, k), (str(mu), n, k)


def test_criterion_2_pascal_recurrence_and_trace():
    with criterion(2, "Pascal recurrence and trace normalization at N = 20, exact", 1):
        for mu in MEASURES:
            T = build_table(moments_of(mu, 20), 20)
            for n in range(20):
                for k in range(n + 1):
                    assert T(n + 1, k) + T(n + 1, k + 1) == T(n, k)
            for n in range(21):
                assert sum(comb(n, k) * T(n, k) for k in range(n + 1)) == 1


def test_criterion_3_membership_oracle_agreement():
    with criterion(3, "membership agrees with the grid LP on 200 seeded vectors", 60):
        rng = random.Random(20240601)
        disagreements, interior, outside = [], 0, 0
        for _ in range(200):
            t = random_vector(rng, 7)
            assert len(t) <= 7
            v = membership(t)
            if v.is_interior:
                interior += 1
                if not lp_feasible(t, 256, F(1, 2**10))[0]:
                    disagreements.append(("interior but LP infeasible", t))
            elif v.is_outside and v.witness.violation > F(1, 2**8):
                outside += 1
                if lp_feasible(t, 256, F(1, 2**12))[0]:
                    disagreements.append(("outside but LP feasible", t))
        assert interior >= 20 and outside >= 20  # both implications are exercised
        assert disagreements == []


def test_criterion_4_extension_interval_exactness():
    with criterion(4, "extension intervals exact, 50 sampled points agree per interval", 1):
        cases = [((1, F(1, 2)), (F(1, 4), F(1, 2))), ((1, F(1, 2), F(3, 8)), (F(9, 32), F(11, 32)))]
        rng = random.Random(4)
        for t, (lo, hi) in cases:
            e = extension_interval(t)
            assert (e.lo, e.hi) == (lo, hi)
            width = hi - lo
            for i in range(50):
                if i % 2:
                    s = lo + width * F(rng.randint(1, 999), 1000)
                else:
                    side = rng.choice([-1, 1])
                    s = (lo if side < 0 else hi) + side * width * F(rng.randint(0, 1000), 1000)
                assert membership(tuple(t) + (s,)).is_interior == (lo < s < hi), (t, s)


def test_criterion_5_perturbation_contract():
    with criterion(5, "perturb Lebesgue m=8, eps=2^-10, N=32 into Z[1/2], Z[1/3], Z[1/2,1/3]", 30):
        for text in ["Z[1/2]", "Z[1/3]", "Z[1/2,1/3]"]:
            G = Subgroup.parse(text)
            req = PerturbationRequest(Measure.lebesgue(), 8, F(1, 2**10), G, 32)
            res = perturb(req)
            checks = check_result(res)
            assert checks == {"subgroup": True, "interior": True, "nontrivial": True, "deviation": True}
            again = perturb(PerturbationRequest(Measure.lebesgue(), 8, F(1, 2**10), G, 32))
            assert again.sequence == res.sequence  # determinism
            seq = res.sequence
            assert len(seq) == 33 and all(contains(G, x) for x in seq)
            assert all(abs(seq[j] - F(1, j + 1)) < F(1, 2**10) for j in range(1, 9))


def test_criterion_6_rational_independence():
    with criterion(6, "independent terms over seven square-root generators at N = 6", 30):
        G = Subgroup.parse("gen:1,sqrt2,sqrt3,sqrt5,sqrt7,sqrt11,sqrt13")
        req = PerturbationRequest(Measure.lebesgue(), 3, F(1, 64), G, 6, independent=True)
        res = perturb_independent(req)
        elems = res.elements
        assert [rational_rank(elems[: n + 1], G) for n in range(7)] == [1, 2, 3, 4, 5, 6, 7]
        report = verify_hom(build_table(elems, 6))
        assert report.faithful and report.injective
        assert all(res.checks.values())


def test_criterion_7_cantor_embedding():
    with criterion(7, "embedding certificate at N = 10 verifies; mutations are caught", 60):
        cert = build_embedding(10)
        assert verify_embedding(cert).ok
        funcs = list(cert.functions)
        vectors = cert.vectors()

        # every single off-lattice bump and every g2 = g1 collapse is caught
        # by the per-cylinder predicates the verifier applies
        for n, f in enumerate(funcs):
            for w, v in f.leaves().items():
                assert not in_lattice(v + F(1, 7), w)
        for w, vals in vectors.items():
            assert vals[2] < vals[1] and not membership(vals[:2] + (vals[1],)).is_interior

        # end-to-end: re-verify sampled mutated certificates
        rng = random.Random(7)
        for _ in range(2):
            n = rng.randint(1, 10)
            leaves = funcs[n].leaves()
            w = rng.choice(sorted(leaves))
            leaves[w] += F(1, 7)
            bad = EmbeddingCertificate(10, tuple(funcs[:n] + [CylinderFunction(leaves)] + funcs[n + 1:]))
            report = verify_embedding(bad, max_violations=1)
            assert not report.ok and report.violations[0]["kind"] == "lattice"
        part = sorted(vectors)
        g1 = funcs[1].refine(part).leaves()
        for _ in range(2):
            g2 = funcs[2].refine(part).leaves()
            w = rng.choice(part)
            g2[w] = g1[w]
            bad = EmbeddingCertificate(10, tuple(funcs[:2] + [CylinderFunction(g2)] + funcs[3:]))
            report = verify_embedding(bad, max_violations=1)
            assert not report.ok and report.violations[0]["w"].startswith(w)


def test_criterion_8_density_on_atomic_corpus():
    with criterion(8, "perturb_prefix never exhausts precision on 100 atomic measures", 60):
        rng = random.Random(8)
        G = Subgroup.parse("Z[1/2]")
        failures = []
        for _ in range(100):
            mu = random_atomic(rng, 4)
            req = PerturbationRequest(mu, 4, F(1, 2**8), G, 4)
            try:
                t = perturb_prefix(req)
            except PrecisionExhausted as exc:
                failures.append((str(mu), str(exc)))
                continue
            s = moments_of(mu, 4)
            assert all(contains(G, x) for x in t)
            assert all(abs(t[j] - s[j]) < F(1, 2**8) for j in range(1, 5))
            assert all(membership(t.truncate(n)).is_interior for n in range(1, 5))
        assert failures == []
