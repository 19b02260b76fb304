import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plie.boros import (
    INVERSE_SQUARE,
    LINEAR,
    BorosFamily,
    boros_grid,
    conjugate_family_set,
    conjugate_to_additive,
    conjugate_to_multiplicative,
    enumerate_boros_families,
    verify_boros,
)
from plie.classify import IDENTITY, enumerate_families
from plie.domain import (
    INF,
    POSITIVE,
    REAL,
    Affine,
    Expr,
    GridMap,
    Interval,
    PowerLaw,
    check_self_map,
    evaluate,
    map_from_text,
)
from plie.errors import DomainError

CASES = {
    "[1,2]": Interval(1, 2),
    "(0,1]": Interval(0, 1, False, True),
    "[1,inf)": Interval(1, INF),
    "(0,inf)": POSITIVE,
}
CS = (0.05, 0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 7.0, 100.0)


def direct_residual(f, x):
    """Independent oracle: |f^3(x) x^2 - f(x)^3| / max(1, x^2, f(x)^3) by plain iteration."""
    y1 = evaluate(f, x)
    y3 = evaluate(f, evaluate(f, y1))
    return abs(y3 * x * x - y1**3) / max(1.0, x * x, y1**3)


class TestFamilySets:
    def test_cases(self):
        assert enumerate_boros_families(CASES["[1,2]"]).describe() == [{"kind": "identity"}]
        assert enumerate_boros_families(CASES["(0,1]"]).describe() == [{"kind": "linear", "c_range": "(0,1]"}]
        assert enumerate_boros_families(CASES["[1,inf)"]).describe() == [{"kind": "linear", "c_range": "[1,inf)"}]
        assert enumerate_boros_families(POSITIVE).describe() == [
            {"kind": "linear", "c_range": "(0,inf)"},
            {"kind": "inverse_square", "c_range": "(0,inf)"},
        ]

    @pytest.mark.parametrize("name", list(CASES))
    def test_conjugated_sets_coincide(self, name):
        J = CASES[name]
        assert conjugate_family_set(enumerate_families(J.log())) == enumerate_boros_families(J)

    @pytest.mark.parametrize(
        "J", [Interval(2, 5), Interval.open(0.5, 3), Interval(0, 4, False, False), Interval.open(3, INF), Interval(0.1, INF)]
    )
    def test_conjugated_sets_other_domains(self, J):
        image = conjugate_family_set(enumerate_families(J.log()))
        # exp(log J) differs from J by rounding only
        assert image.rules == enumerate_boros_families(J).rules
        assert (image.domain.lo, image.domain.hi) == pytest.approx((J.lo, J.hi), rel=1e-15)

    def test_identity_is_linear_one(self):
        fs = enumerate_boros_families(CASES["(0,1]"])
        assert fs.contains(IDENTITY) and fs.contains(LINEAR, 1.0) and not fs.contains(LINEAR, 1.5)
        fs = enumerate_boros_families(CASES["[1,inf)"])
        assert fs.contains(LINEAR, 3.0) and not fs.contains(LINEAR, 0.5)

    @pytest.mark.parametrize(
        "J,inside,outside",
        [
            (Interval(0, 1, False, True), (0.2, 1.0), (1.01, 2.0)),
            (Interval(1, INF), (1.0, 3.0), (0.5, 0.99)),
            (Interval(1, 2), (1.0,), (0.9, 1.1)),
        ],
    )
    def test_ranges_match_self_map_feasibility(self, J, inside, outside):
        window = None if J.is_bounded else (1.0, 50.0)
        fs = enumerate_boros_families(J)
        for c in inside:
            assert fs.contains(LINEAR, c) or fs.contains(IDENTITY, c)
            assert check_self_map(PowerLaw(c, 1.0, J), 257, window).is_self_map
        for c in outside:
            assert not fs.contains(LINEAR, c)
            assert not check_self_map(PowerLaw(c, 1.0, J), 257, window).is_self_map

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            enumerate_boros_families(Interval(0, 1))
        with pytest.raises(DomainError):
            enumerate_boros_families(Interval(-1, 1))

    def test_labels(self):
        assert BorosFamily(INVERSE_SQUARE, 2.0, POSITIVE).label() == "InverseSquare{2.0}"


@pytest.mark.parametrize("name", list(CASES))
def test_members_verify(name):
    J = CASES[name]
    for fam in enumerate_boros_families(J).members(CS):
        f = fam.as_map()
        rep = verify_boros(f, 1001)
        assert rep.is_self_map, (fam, rep.reason)
        assert rep.residual_sup <= 1e-10, fam


@pytest.mark.parametrize("name", list(CASES))
def test_members_agree_with_oracle(name):
    J = CASES[name]
    xs = boros_grid(J, 101, (-30, 30))
    for fam in enumerate_boros_families(J).members(CS):
        f = fam.as_map()
        for u in xs:
            assert direct_residual(f, math.exp(u)) <= 1e-12


class TestVerifyBoros:
    def test_non_member_fails_self_map(self):
        # c = 2 is not admissible on (0,1]: f leaves the domain
        rep = verify_boros(PowerLaw(2.0, 1.0, CASES["(0,1]"]))
        assert not rep.is_self_map and rep.residual_sup is None

    def test_non_solution(self):
        rep = verify_boros(PowerLaw(1.0, 2.0, Interval(1, INF)))
        assert rep.is_self_map and rep.residual_sup > 1

    def test_expression_input(self):
        rep = verify_boros(map_from_text("sqrt(x)*sqrt(x)*2", POSITIVE), 201, (-20, 20))
        assert rep.residual_sup <= 1e-12

    def test_extreme_window_uses_log_space(self):
        rep = verify_boros(PowerLaw(3.0, -2.0, POSITIVE), 1001)
        assert rep.log_space_points > 0 and rep.residual_sup <= 1e-10

    def test_grid_matches_additive(self):
        J = CASES["[1,2]"]
        assert np.array_equal(boros_grid(J, 11), np.linspace(0, math.log(2), 11))


class TestConjugation:
    def test_examples(self):
        assert conjugate_to_additive(PowerLaw(1.0, 1.0, POSITIVE)) == Affine(1.0, 0.0, REAL)
        g = conjugate_to_additive(PowerLaw(math.e, 1.0, POSITIVE))
        assert (g.slope, g.intercept) == (1.0, 1.0)
        g = conjugate_to_additive(PowerLaw(5.0, -2.0, POSITIVE))
        assert (g.slope, g.intercept) == (-2.0, math.log(5.0))
        assert g.domain == REAL

    def test_domains(self):
        g = conjugate_to_additive(PowerLaw(0.5, 1.0, CASES["(0,1]"]))
        assert g.domain == Interval(-INF, 0, False, True)
        with pytest.raises(DomainError):
            conjugate_to_additive(Affine(1, 0, Interval(-1, 1)))

    def test_grid_maps_unsupported(self):
        with pytest.raises(TypeError):
            conjugate_to_additive(GridMap((1, 2), (1, 2), Interval(1, 2)))

    @pytest.mark.parametrize("name", list(CASES))
    def test_round_trip_members(self, name):
        J = CASES[name]
        for fam in enumerate_boros_families(J).members(CS):
            f = fam.as_map()
            back = conjugate_to_multiplicative(conjugate_to_additive(f))
            assert back.domain == J or back.domain.lo == pytest.approx(J.lo)
            for u in np.linspace(-5, 5, 21):
                x = math.exp(u)
                if J.contains(x):
                    assert abs(evaluate(back, x) - evaluate(f, x)) <= 1e-12 * max(1.0, abs(evaluate(f, x)))

    def test_expression_round_trip(self):
        f = map_from_text("x + sqrt(x)", Interval(1, INF))
        g = conjugate_to_additive(f)
        assert isinstance(g, Expr)
        back = conjugate_to_multiplicative(g)
        for x in (1.0, 2.0, 10.0, 123.0):
            assert evaluate(back, x) == pytest.approx(evaluate(f, x), rel=1e-12)

    @given(st.floats(-20, 20), st.floats(-3, 3), st.floats(-20, 20))
    @settings(max_examples=100)
    def test_conjugacy_law(self, b, a, u):
        # exp(g(u)) = f(exp(u)) for f = conjugate_to_multiplicative(g)
        g = Affine(a, b)
        f = conjugate_to_multiplicative(g)
        lhs = math.exp(evaluate(g, u)) if abs(a * u + b) < 700 else None
        if lhs is not None and lhs > 1e-300:
            assert evaluate(f, math.exp(u)) == pytest.approx(lhs, rel=1e-12)
