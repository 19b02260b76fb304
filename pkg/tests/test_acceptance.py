"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every check records one ``PASS``/``FAIL`` line; the lines are printed at the
end of the pytest run (see conftest.py) and when run as a script.
"""

import math
import os
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from test_expr import CORPUS, MALFORMED  # noqa: E402

from plie import expr as ex  # noqa: E402
from plie import report as rp  # noqa: E402
from plie.algebra import (  # noqa: E402
    CharPoly,
    anti_monotone_check,
    b_closed_form,
    char_roots,
    coeff_table,
    expansion_residual,
    fit_ABC,
    limit_functional,
)
from plie.boros import (  # noqa: E402
    conjugate_family_set,
    conjugate_to_additive,
    conjugate_to_multiplicative,
    enumerate_boros_families,
    verify_boros,
)
from plie.classify import (  # noqa: E402
    affine_inverse,
    babbage_residual,
    enumerate_families,
    inverse_equation_residual,
    verify_solution,
)
from plie.domain import INF, POSITIVE, REAL, Affine, Interval, evaluate, orbit, sample_grid  # noqa: E402
from plie.errors import ParseError  # noqa: E402
from plie.solver import SolverConfig, falsification_suite, solve  # noqa: E402

RESULTS = {}
UNIT = Interval(0, 1)
CS = (-3.0, -1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0, 3.0)
BOROS_CS = (0.05, 0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 7.0, 100.0)


def record(k, name, ok, elapsed, budget, detail):
    ok = bool(ok) and elapsed < budget
    RESULTS[k] = f"criterion {k} {'PASS' if ok else 'FAIL'}  {name}: {detail} [{elapsed:.2f}s / {budget:g}s]"
    print(RESULTS[k])
    return ok


def criterion_1():
    t0 = time.perf_counter()
    rows = coeff_table(40)
    closed = all(Fraction(r.b) == b_closed_form(r.n) for r in rows)
    sums = all(r.a + r.b + r.c == 1 for r in rows)
    return record(1, "recurrence vs closed form", closed and sums, time.perf_counter() - t0, 1,
                  f"b_n closed form {closed}, a+b+c=1 {sums}, n=0..40")


def criterion_2():
    t0 = time.perf_counter()
    a = char_roots(CharPoly.parse("2,-3,0,1")).as_dict()
    b = char_roots(CharPoly.parse("1,0,-3,2")).as_dict()
    ok = a == {Fraction(1): 2, Fraction(-2): 1} and b == {Fraction(1): 2, Fraction(-1, 2): 1}
    exact = all(isinstance(k, Fraction) for k in list(a) + list(b))
    return record(2, "characteristic roots", ok and exact, time.perf_counter() - t0, 1,
                  f"r^3-3r+2 -> {fmt_roots(a)}; 2r^3-3r^2+1 -> {fmt_roots(b)}")


def fmt_roots(d):
    return "{" + ", ".join(f"{k}:{v}" for k, v in d.items()) + "}"


def criterion_3():
    t0 = time.perf_counter()
    domains = [
        (Interval(0, 1), None),
        (Interval.open(0, 1), None),
        (Interval(0, INF), (0.0, 5.0)),
        (Interval(-INF, 0), (-5.0, 0.0)),
        (REAL, (-5.0, 5.0)),
    ]
    worst_res, worst_exp, count, ok = 0.0, 0.0, 0, True
    for dom, window in domains:
        pts = sample_grid(dom, 101, window)
        for fam in enumerate_families(dom).members(CS):
            g = fam.as_map()
            rep = verify_solution(g, 1001, window)
            count += 1
            if not rep.is_self_map:
                ok = False
                continue
            worst_res = max(worst_res, rep.residual_sup)
            for n in range(11):
                for x in pts:
                    worst_exp = max(worst_exp, abs(expansion_residual(g, n, float(x), scaled=True)))
    ok = ok and worst_res <= 1e-12 and worst_exp <= 1e-9
    return record(3, "family soundness", ok, time.perf_counter() - t0, 10,
                  f"{count} members, max residual {worst_res:.1e}, max expansion residual {worst_exp:.1e}")


def criterion_4():
    t0 = time.perf_counter()
    cases = [Interval(1, 2), Interval(0, 1, False, True), Interval(1, INF), POSITIVE]
    worst_res, worst_rt, count, ok = 0.0, 0.0, 0, True
    for J in cases:
        ok &= conjugate_family_set(enumerate_families(J.log())).rules == enumerate_boros_families(J).rules
        for fam in enumerate_boros_families(J).members(BOROS_CS):
            f = fam.as_map()
            rep = verify_boros(f, 1001)
            count += 1
            if not rep.is_self_map:
                ok = False
                continue
            worst_res = max(worst_res, rep.residual_sup)
            back = conjugate_to_multiplicative(conjugate_to_additive(f))
            for u in np.linspace(-5, 5, 41):
                x = math.exp(u)
                if J.contains(x):
                    y = evaluate(f, x)
                    worst_rt = max(worst_rt, abs(evaluate(back, x) - y) / max(1.0, abs(y)))
    ok = ok and worst_res <= 1e-10 and worst_rt <= 1e-12
    return record(4, "multiplicative equivalence", ok, time.perf_counter() - t0, 10,
                  f"{count} members, max residual {worst_res:.1e}, max round-trip error {worst_rt:.1e}")


def criterion_5():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    xs = np.linspace(-10, 10, 201)
    worst_inv, worst_A, worst_bab, anti = 0.0, 0.0, 0.0, True
    for c in (-3.0, 0.0, 1.0, 7.0):
        g = Affine(-2.0, c)
        G = affine_inverse(g)
        assert (G.slope, G.intercept) == (-0.5, c / 2)
        for x in xs:
            worst_inv = max(worst_inv, abs(inverse_equation_residual(G, float(x))))
            worst_bab = max(worst_bab, abs(babbage_residual(g, float(x))))
        for x0 in rng.uniform(-10, 10, 10):
            o = orbit(G, float(x0), 12)
            worst_A = max(worst_A, abs(fit_ABC(*o.values[:3]).A))
            anti &= anti_monotone_check(o).holds
    ok = worst_inv <= 1e-12 and worst_A <= 1e-10 and anti and worst_bab <= 1e-12
    return record(5, "inverse-equation pipeline", ok, time.perf_counter() - t0, 5,
                  f"inverse residual {worst_inv:.1e}, max |A| {worst_A:.1e}, anti-monotone {anti}, "
                  f"two-step residual {worst_bab:.1e}")


def criterion_6():
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for text, g in (("x", Affine(1.0, 0.0)), ("x+1", Affine(1.0, 1.0)), ("-2*x+1", Affine(-2.0, 1.0))):
        for x in (-2.0, -1.0, 0.0, 0.5, 1.0):
            rep = limit_functional(g, x, 20)
            err = abs(rep.lhs_sequence[20] - rep.rhs)
            if err > worst:
                worst, where = err, (text, x)
    return record(6, "limit law at n=20", worst <= 1e-6, time.perf_counter() - t0, 1,
                  f"max error {worst:.2e} (g={where[0]}, x={where[1]}); tolerance 1e-6")


def criterion_7():
    t0 = time.perf_counter()
    up = falsification_suite(UNIT, 100, 0, SolverConfig())
    per_run = all(r.final_residual < 1e-8 and r.distance_sup < 1e-2 for r in up.results if r.success)
    down = falsification_suite(UNIT, 100, 0, SolverConfig(monotone=False))
    never = all(r.final_residual >= 1e-4 for r in down.results)
    ok = up.success_rate >= 0.95 and per_run and never
    return record(7, "empirical classification", ok, time.perf_counter() - t0, 600,
                  f"increasing success {up.success_rate:.2f} (worst distance {up.worst_distance:.1e}); "
                  f"decreasing min residual {down.min_residual:.2e}")


def criterion_8():
    t0 = time.perf_counter()
    bad = 0
    for text, ref in CORPUS:
        node = ex.parse(text)
        printed = ex.to_text(node)
        if ex.parse(printed) != node or ex.to_text(ex.parse(printed)) != printed:
            bad += 1
            continue
        for k in range(11):
            x = 0.5 + 2.5 * k / 10
            want = ref(x)
            if abs(ex.evaluate(node, x) - want) > 1e-15 * max(1.0, abs(want)):
                bad += 1
                break
    wrong_pos = 0
    for text, pos in MALFORMED:
        try:
            ex.parse(text)
            wrong_pos += 1
        except ParseError as err:
            wrong_pos += err.position != pos
    ok = len(CORPUS) == 50 and len(MALFORMED) == 20 and bad == 0 and wrong_pos == 0
    return record(8, "parser", ok, time.perf_counter() - t0, 1,
                  f"{50 - bad}/50 corpus entries, {20 - wrong_pos}/20 error positions")


def criterion_9():
    t0 = time.perf_counter()
    docs = [rp.dumps(rp.solve_doc(solve(SolverConfig(seed=0), UNIT))) for _ in range(2)]
    ok = docs[0] == docs[1]
    return record(9, "determinism", ok, time.perf_counter() - t0, 60,
                  f"seed 0 report {'identical' if ok else 'differs'} across runs ({len(docs[0])} bytes)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 10)])
def test_criterion(check):
    assert check(), RESULTS[CRITERIA.index(check) + 1]


if __name__ == "__main__":
    results = [check() for check in CRITERIA]
    sys.exit(0 if all(results) else 1)
