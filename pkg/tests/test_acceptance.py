"""Acceptance criteria, one test (and one printed PASS/FAIL line) each.

Run with `pytest tests/test_acceptance.py -v`; the criterion lines are
written to the terminal even under output capture.
"""

import random
import time
from fractions import Fraction

from heightlab.arith.cyclotomic import euler_phi, sqrt_conductor
from heightlab.arith.padic import place_structure
from heightlab.bounds.constants import bound_certificate, elkies_constant, theorem1_bound, verify_admissible
from heightlab.bounds.pairwise import tate_floor_check
from heightlab.bounds.survey import SurveyFamily, height_floor_survey, slice_x_values, torsion_points
from heightlab.bounds.theorem2 import quadratic_field, slice_point
from heightlab.cli import run_command
from heightlab.cm.frobenius import (
    apply_endomorphism,
    cm_order,
    cm_unit_action,
    cyclotomic_point,
    frobenius_lift,
    frobenius_reduction_check,
    norm_relation_holds,
)
from heightlab.cm.lemmas import torsion_test, verify_unram_lemma
from heightlab.corpus import corpus_entry, load_corpus
from heightlab.curves.reduction import bad_primes
from heightlab.curves.weierstrass import WeierstrassCurve
from heightlab.errors import TorsionInput
from heightlab.heights.local import (
    canonical_height_local_sum,
    lambda_arch_lattice,
    lambda_nonarch,
    lambda_nonarch_place,
    places_for,
)
from heightlab.heights.parallelogram import canonical_height
from heightlab.report import digest, load_manifest
from heightlab.suites import BUDGETS, Budget, suite_chain, suite_cong, suite_hs, suite_parallelogram, suite_ram

DESK = BUDGETS["desk"]


def _non_torsion_points(entry, want):
    """Corpus points and small multiples that are not torsion."""
    E, out = entry.curve, []
    for P in entry.points:
        for k in (1, 2, 3):
            Q = E.scalar_mul(k, P)
            if not Q.is_infinity and not torsion_test(E, Q).torsion and Q not in out:
                out.append(Q)
            if len(out) >= want:
                return out
    return out


def test_c01_cross_method(criterion):
    t0 = time.time()
    rows, worst = [], 0.0
    labels = [e.label for e in load_corpus() if e.points]
    for label in labels:
        entry = corpus_entry(label)
        for P in _non_torsion_points(entry, 5):
            loc = canonical_height_local_sum(entry.curve, P, radius=1e-10).total
            dbl = canonical_height(entry.curve, P, radius=1e-10)
            diff = loc - dbl
            ok = diff.contains_zero() and max(loc.radius, dbl.radius) <= 1e-8
            worst = max(worst, abs(diff.value))
            rows.append((label, ok))
    curves = {lab for lab, _ in rows}
    elapsed = time.time() - t0
    ok = len(rows) >= 20 and len(curves) >= 5 and all(o for _, o in rows) and elapsed < 300
    criterion(1, "local-sum vs doubling height", ok,
              f"{len(rows)} points on {len(curves)} curves, max |diff| {worst:.2e}, {elapsed:.1f}s")


def test_c02_quadraticity_parallelogram(criterion):
    res = suite_parallelogram(Budget("acceptance", pairs=50), seed=2)
    n = len(res["reports"])
    bad = [r for r in res["reports"] if not r["pass"]]
    criterion(2, "quadraticity n in {2,3,5} and parallelogram law", n == 50 and not bad,
              f"{n} pairs, {len(bad)} failures")


def test_c03_weights_and_functoriality(criterion):
    cases = 0
    weights_ok = True
    for m in range(1, 201):
        for p in (2, 3, 5, 7, 11, 13, 37):
            if m % p == 0:
                continue
            ws = place_structure(m, p, N=8)
            cases += 1
            weights_ok &= sum(w.weight for w in ws) == 1
            weights_ok &= len(ws) * ws[0].f == euler_phi(m)
    # 4(2,-3) on 37a has x with denominator divisible by 5 and 13, both good
    E = corpus_entry("37a").curve
    P = E.scalar_mul(4, E.point(2, -3))
    primes = [q for q in (5, 13) if P.rational_x().denominator % q == 0 and q not in bad_primes(E)]
    func_ok = len(primes) == 2
    checked = []
    for p in primes:
        for m in (3, 4, 7, 8, 12, 21):
            if m % p == 0:
                continue
            Pm = cyclotomic_point(P, m)
            total = None
            for w in place_structure(m, p):
                term = lambda_nonarch_place(E, Pm, w).scale(w.weight)
                total = term if total is None else total + term
            lam = lambda_nonarch(E, P, p)
            diff = total - lam
            exact = total.log_coefficient(p) == lam.log_coefficient(p)
            func_ok &= exact and diff.contains_zero() and diff.radius <= 1e-8 and lam.value > 0
            checked.append((p, m))
    criterion(3, "local degree weights and base-change functoriality", weights_ok and func_ok,
              f"{cases} (m, p) weight cases; functoriality at p in {primes} for m in {{3,4,7,8,12,21}}")


def test_c04_archimedean_floor(criterion):
    rng = random.Random(4)
    summary, ok = [], True
    for label in ("cm0", "cm1728", "37a"):
        E = corpus_entry(label).curve
        place = places_for(E, E.infinity())[0]
        C1 = elkies_constant(E).C1
        viol, lo = 0, None
        for _ in range(100):
            a, b = Fraction(rng.randrange(1, 10**6), 10**6), Fraction(rng.randrange(10**6), 10**6)
            lam = lambda_arch_lattice(E, place, a, b)
            viol += not lam.certainly_ge(-C1)
            lo = lam.value if lo is None else min(lo, lam.value)
        ok &= viol == 0
        summary.append(f"j={E.j}: min {lo:.3f} vs -C1 {-C1.value:.3f}, {viol} violations")
    criterion(4, "lambda_inf >= -C1 on random points of E(C)", ok, "; ".join(summary))


def test_c05_tate_floor(criterion):
    E = corpus_entry("37a").curve
    G = E.point(0, 0)
    reps = [tate_floor_check(E, E.scalar_mul(k, G), 37) for k in range(1, 13)]
    ident = [r for r in reps if r.identity_component]
    ok = (len(reps) >= 10 and all(r.passed for r in reps) and ident
          and all(r.floor == Fraction(1, 12) for r in ident))
    criterion(5, "Tate/B2 floor at p = 37", ok,
              f"{len(reps)} points, {len(ident)} on the identity component, floor 1/12 log 37")


def test_c06_hs_averaging(criterion):
    res = suite_hs(DESK)
    hs = [r for r in res["reports"] if r["check"] == "hs"]
    n37 = sorted(r["N"] for r in hs if r["curve"] == "37a")
    nu2 = [r for r in hs if r["detail"]["nu"] >= 2]
    ok = n37 == list(range(2, 9)) and nu2 and all(r["pass"] for r in hs)
    criterion(6, "pairwise averaging bound, exact", ok,
              f"37a N = {n37[0]}..{n37[-1]}; nu = {nu2[0]['detail']['nu']} curve N up to {max(r['N'] for r in nu2)}")


def _cm_points(E, order, count, rng):
    """Combinations [a]P + iota([b]Q) of corpus points plus small-conductor
    slice points."""
    base = list(corpus_entry("cm1728").points)
    for x in slice_x_values(6):
        Q = slice_point(E, x)
        if Q is not None and sqrt_conductor(quadratic_field(Q)) in (4, 8, 12, 24):
            base.append(Q)
    out = list(base)
    while len(out) < count:
        P, Q = rng.choice(base[:3]), rng.choice(base[:3])
        a, b = rng.randint(-2, 2), rng.randint(-2, 2)
        R = E.add(E.scalar_mul(a, P), cm_unit_action(E, E.scalar_mul(b, Q), order, 4))
        if not R.is_infinity and R not in out:
            out.append(R)
    return out[:count]


def test_c07_cm_frobenius(criterion):
    rng = random.Random(7)
    E = corpus_entry("cm1728").curve
    order = cm_order(E)
    pts = _cm_points(E, order, 20, rng)
    h_ok, norm_ok, red_ok, worst = True, True, True, 0.0
    for p in (5, 13):
        lift = frobenius_lift(p, order, E)
        for P in corpus_entry("cm1728").points:
            hP = canonical_height(E, P, radius=1e-9)
            hFP = canonical_height(E, apply_endomorphism(E, lift, P), radius=1e-9)
            d = hFP - hP.scale(p)
            worst = max(worst, abs(d.value))
            h_ok &= abs(d.value) + d.radius <= 1e-6
        for P in pts:
            norm_ok &= norm_relation_holds(E, lift, P)
            red_ok &= all(frobenius_reduction_check(E, lift, P).values())
    ok = h_ok and norm_ok and red_ok and len(pts) == 20
    criterion(7, "Frobenius lift: h(FP) = p h(P), F Fbar = [p], reduction to Frobenius", ok,
              f"p in {{5, 13}}, max |h(FP) - p h(P)| {worst:.1e}, {len(pts)} points for F Fbar and reduction")


def test_c08_congruence(criterion):
    res = suite_cong(DESK)
    cases = [(r["inputs"]["m"], r["inputs"]["p"]) for r in res["reports"]]
    ok = res["pass"] and sorted(cases) == [(20, 5), (25, 5), (26, 13)]
    criterion(8, "inertia congruence, 1000 samples each", ok, f"cases {cases}")


def test_c09_unramified(criterion):
    E = corpus_entry("cm1728").curve
    pts = list(corpus_entry("cm1728").points)
    for x in slice_x_values(4):
        Q = slice_point(E, x)
        if Q is not None and sqrt_conductor(quadratic_field(Q)) in (4, 8):
            pts.append(Q)
    tors = list(corpus_entry("cm1728").torsion) + [T for T in torsion_points(E, 8) if not T.is_rational()]
    ok, n_pts, n_tors = True, 0, 0
    for p in (5, 13):
        for P in pts:
            rep = verify_unram_lemma(E, P, p)
            ok &= rep.passed
            n_pts += 1
        for T in tors:
            try:
                verify_unram_lemma(E, T, p)
                ok = False
            except TorsionInput:
                n_tors += 1
    criterion(9, "unramified lemma: FP != sigma P and kernel of reduction; torsion gives FP = sigma P", ok,
              f"{n_pts} point checks, {n_tors} torsion triggers")


def test_c10_ramified(criterion):
    res = suite_ram(DESK)
    lemma = [r for r in res["reports"] if r["lemma"] == "ramified"]
    branches = {(r["inputs"]["k"], c.get("branch")) for r in lemma for c in r["checks"] if c.get("branch")}
    witness = [r for r in lemma if any(c["name"] == "tau(P + T) = P + T" and c["pass"] for c in r["checks"])]
    ok = res["pass"] and {(1, 1), (1, 2), (2, 1), (2, 2)} <= branches and {r["inputs"]["k"] for r in witness} == {1, 2}
    criterion(10, "ramified lemma, both branches, k in {1, 2} at p = 5", ok,
              f"branches {sorted(branches)}; " + "; ".join(res["notes"]))


def test_c11_admissible_place_and_survey(criterion):
    E = WeierstrassCurve.from_ainvs([0, 0, 0, -1, 0])
    cert = bound_certificate(E, base="Q(i)")
    checks = verify_admissible(E, "Q(i)", cert.p)
    bu = theorem1_bound(cert.p, cert.D, cert.C1, False)
    br = theorem1_bound(cert.p, cert.D, cert.C1, True)
    res = height_floor_survey(E, SurveyFamily(B=20), cert)
    m = res.minimum
    flags = cert.assumptions
    ok = (all(checks.values()) and cert.A_p.lower > 0 and bu.lower > 0 and br.lower > 0
          and res.passed and len(res.non_torsion) > 0 and set(flags) >= {"p_good", "p_splits", "A_p_positive"})
    criterion(11, "admissible place, both bounds, quadratic-slice survey B = 20", ok,
              f"p = {cert.p}, A_p = {cert.A_p.value:.4f}, bounds {bu.value:.3e}/{br.value:.3e}; "
              f"{len(res.non_torsion)} non-torsion rows, min h = {m.height.value:.4f} at {m.point}")


def test_c12_chain(criterion):
    res = suite_chain(DESK)
    case1 = [r for r in res["reports"] if r["mode"] == "case1"]
    case2 = [r for r in res["reports"] if r["mode"] == "case2"]
    eq0 = [s for r in case1 for s in r["steps"] if s["step"] == "proofeqn0"]
    kern = [s for r in case2 for s in r["steps"] if s["step"] == "kernel_floor"]
    exact = all("log_terms" in s["lhs"] and "log_terms" in s["rhs"] for s in kern)
    ok = res["pass"] and len(case1) >= 10 and len(eq0) == len(case1) and all(s["pass"] for s in eq0) and kern and exact
    criterion(12, "height chain on quadratic orbits of 37a; case-2 floor on an inertia orbit", ok,
              f"{len(case1)} orbits, case 2: {kern[0]['note'] if kern else 'missing'}")


def test_c13_manifest_determinism(criterion, tmp_path):
    commands = [
        ["height", "--curve", "0,0,1,-1,0", "--point", "0;0", "--prec", "96"],
        ["local-heights", "--curve", "37a", "--point", "1/4;-5/8", "--prime", "2", "--m", "15"],
        ["constants", "--curve", "cm0", "--format", "text"],
        ["bound", "--curve", "0,0,0,-1,0", "--field", "Q(i)"],
        ["survey", "--curve", "0,0,0,-1,0", "--field", "Q(i)", "--box", "6", "--format", "csv"],
        ["verify-lemmas", "--suite", "hs", "--suite", "chain"],
    ]
    ok, n = True, 0
    for i, argv in enumerate(commands):
        man = tmp_path / f"m{i}.json"
        code, first = run_command(argv + ["--manifest", str(man)])
        again = run_command(argv)[1]
        rcode, replayed = run_command(["replay", str(man)])
        manifest = load_manifest(man)
        ok &= code == 0 and rcode == 0 and first == again == replayed and manifest.output_digest == digest(first)
        n += 1
    criterion(13, "manifest replay reproduces byte-identical reports", ok, f"{n} commands")
