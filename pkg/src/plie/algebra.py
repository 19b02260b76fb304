"""Exact coefficient machinery for g^3 = 3g - 2 id.

Iterating the equation expresses every higher iterate through the first
three::

    g^(n+3)(x) = a_n g^2(x) + b_n g(x) + c_n x,   (a_0, b_0, c_0) = (0, 3, -2)

The coefficients grow like 2^n, so they are kept as Python integers and only
converted to float where they meet a map evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .domain import DEFAULT_TOL, Orbit, SelfMap, Tolerance, orbit
from .errors import NumericError, ParseError

# --- iterate coefficients --------------------------------------------------


@dataclass(frozen=True)
class CoeffTriple:
    n: int
    a: int
    b: int
    c: int

    @property
    def magnitude(self) -> int:
        return max(abs(self.a), abs(self.b), abs(self.c))


def iterate_coeffs(n: int) -> CoeffTriple:
    if n < 0:
        raise ValueError("n must be nonnegative")
    a, b, c = 0, 3, -2
    for _ in range(n):
        a, b, c = b, 3 * a + c, -2 * a
    return CoeffTriple(n, a, b, c)


def coeff_table(n_max: int) -> list[CoeffTriple]:
    out = [CoeffTriple(0, 0, 3, -2)]
    for k in range(n_max):
        t = out[-1]
        out.append(CoeffTriple(k + 1, t.b, 3 * t.a + t.c, -2 * t.a))
    return out


def b_closed_form(n: int) -> Fraction:
    return Fraction((-2) ** (n + 4) + 3 * n + 11, 9)


def b_difference(n: int) -> int:
    """sum_{k=0}^{n+3} (-2)^k."""
    num = 1 - (-2) ** (n + 4)
    assert num % 3 == 0
    return num // 3


def companion_coeffs(alpha: Sequence, n: int) -> tuple:
    """Coefficients of g^(N+n) on the basis (g^0, ..., g^(N-1)).

    ``alpha`` lists the ascending coefficients of ``sum alpha_k g^k = 0``.
    For ``alpha = (2, -3, 0, 1)`` the result is ``(c_n, b_n, a_n)``.
    """
    alpha = [Fraction(v) for v in alpha]
    N = len(alpha) - 1
    if N < 1 or alpha[-1] == 0:
        raise ValueError("need a leading coefficient and degree >= 1")
    top = [-v / alpha[-1] for v in alpha[:-1]]
    s = list(top)
    for _ in range(n):
        lead = s[-1]
        s = [Fraction(0)] + s[:-1]
        s = [u + lead * t for u, t in zip(s, top)]
    return tuple(int(v) if v.denominator == 1 else v for v in s)


# --- characteristic polynomials --------------------------------------------


@dataclass(frozen=True)
class CharPoly:
    coefficients: tuple  # ascending alpha_0..alpha_N as Fractions

    def __post_init__(self):
        co = tuple(Fraction(v) for v in self.coefficients)
        if len(co) < 2 or co[-1] == 0:
            raise ValueError("characteristic polynomial needs degree >= 1 and alpha_N != 0")
        object.__setattr__(self, "coefficients", co)

    @classmethod
    def parse(cls, text: str) -> "CharPoly":
        parts = [p.strip() for p in text.split(",")]
        co = []
        pos = 0
        for p in parts:
            try:
                co.append(Fraction(p))
            except (ValueError, ZeroDivisionError):
                raise ParseError(pos, "a rational coefficient", repr(p), text) from None
            pos += len(p) + 1
        while len(co) > 1 and co[-1] == 0:
            co.pop()
        if len(co) < 2:
            raise ParseError(len(text), "a polynomial of degree >= 1", repr(text), text)
        return cls(tuple(co))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


@dataclass(frozen=True)
class Root:
    """A root with multiplicity; complex roots stand for a conjugate pair."""

    value: Union[Fraction, float, complex]
    multiplicity: int
    exact: bool

    @property
    def is_pair(self) -> bool:
        return isinstance(self.value, complex)

    @property
    def count(self) -> int:
        return self.multiplicity * (2 if self.is_pair else 1)


@dataclass(frozen=True)
class RootSet:
    roots: tuple
    factorization: str

    @property
    def degree(self) -> int:
        return sum(r.count for r in self.roots)

    def as_dict(self) -> dict:
        """{root: multiplicity} with exact roots keyed by Fraction."""
        return {r.value: r.multiplicity for r in self.roots}


def _trim(p: list) -> list:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _divmod(num: list, den: list) -> tuple[list, list]:
    num = list(num)
    q = [Fraction(0)] * max(1, len(num) - len(den) + 1)
    while len(num) >= len(den) and any(num):
        k = len(num) - len(den)
        f = num[-1] / den[-1]
        q[k] = f
        for i, d in enumerate(den):
            num[i + k] -= f * d
        num.pop()
        _trim(num) if num else None
    return _trim(q), _trim(num or [Fraction(0)])


def _monic(p: list) -> list:
    return [v / p[-1] for v in p]


def _gcd(a: list, b: list) -> list:
    while len(b) > 1 or b[0] != 0:
        a, b = b, _divmod(a, b)[1]
    return _monic(a)


def _deriv(p: list) -> list:
    return _trim([i * v for i, v in enumerate(p)][1:] or [Fraction(0)])


def _horner(p: Sequence, r):
    acc = 0 * r
    for v in reversed(p):
        acc = acc * r + v
    return acc


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _squarefree(p: list) -> list[tuple[list, int]]:
    """Yun's algorithm: [(factor, multiplicity)] with squarefree factors."""
    out = []
    dp = _deriv(p)
    b = _gcd(p, dp)
    c = _divmod(p, b)[0]
    d = _divmod(dp, b)[0]
    i = 1
    while len(c) > 1:
        d = [u - v for u, v in zip(d + [0] * len(c), _deriv(c) + [0] * len(d))]
        d = _trim(d)
        a = _gcd(c, d) if any(d) else _monic(c)
        if len(a) > 1:
            out.append((a, i))
        c = _divmod(c, a)[0]
        d = _divmod(d, a)[0] if any(d) else [Fraction(0)]
        i += 1
    return out


def _polish(p: list, z: complex, budget: int = 100, tol: float = 1e-12) -> complex:
    pf = [complex(v) for v in p]
    dpf = [i * v for i, v in enumerate(pf)][1:]
    for _ in range(budget):
        fz = _horner(pf, z)
        dz = _horner(dpf, z)
        if dz == 0:
            raise NumericError(f"zero derivative while refining root near {z}")
        step = fz / dz
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    raise NumericError(f"root refinement did not converge near {z}")


def _fmt_frac(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def char_roots(poly: CharPoly, tol: float = 1e-12) -> RootSet:
    """Roots with multiplicities: exact rationals first, the rest numerically."""
    co = list(poly.coefficients)
    scale = math.lcm(*(v.denominator for v in co))
    co = [v * scale for v in co]
    g = math.gcd(*(int(v) for v in co))
    co = _trim([Fraction(int(v) // g) for v in co])
    lead = poly.coefficients[-1]  # factorization is of the polynomial as given
    factors = [] if lead == 1 else (["-1"] if lead == -1 else [_fmt_frac(lead)])
    roots: list[Root] = []

    zero_mult = 0
    while co[0] == 0:
        co.pop(0)
        zero_mult += 1
    if zero_mult:
        roots.append(Root(Fraction(0), zero_mult, True))

    if len(co) > 1:
        cands = sorted(
            {Fraction(s * p, q) for p in _divisors(int(co[0])) for q in _divisors(int(co[-1])) for s in (1, -1)},
            reverse=True,
        )
        for r in cands:
            mult = 0
            while len(co) > 1 and _horner(co, r) == 0:
                co = _divmod(co, [-r, Fraction(1)])[0]
                mult += 1
            if mult:
                roots.append(Root(r, mult, True))

    rest = _monic(co) if len(co) > 1 else [Fraction(1)]
    if len(rest) > 1:
        for factor, mult in _squarefree(rest):
            deg = len(factor) - 1
            guesses = np.roots([float(v) for v in reversed(factor)])
            found = []
            for z0 in guesses:
                z = _polish(factor, complex(z0), tol=tol)
                if abs(z.imag) <= tol * max(1.0, abs(z)):
                    found.append(Root(z.real + 0.0, mult, False))
                elif z.imag > 0:
                    found.append(Root(complex(z.real + 0.0, z.imag), mult, False))
            if sum(r.count for r in found) != mult * deg:
                raise NumericError("numerical roots do not account for the factor degree")
            roots.extend(found)
            factors.append(f"({_poly_text(factor)})" + (f"^{mult}" if mult > 1 else ""))

    for r in roots:
        if r.exact:
            lin = "r" if r.value == 0 else f"r {'-' if r.value > 0 else '+'} {_fmt_frac(abs(r.value))}"
            factors.append(f"({lin})" + (f"^{r.multiplicity}" if r.multiplicity > 1 else ""))

    def key(r: Root):
        v = r.value
        return (-(v.real if isinstance(v, complex) else float(v)), -(v.imag if isinstance(v, complex) else 0.0))

    roots.sort(key=key)
    out = RootSet(tuple(roots), "*".join(factors) or "1")
    assert out.degree == poly.degree
    return out


def _poly_text(p: list) -> str:
    terms = []
    for i in range(len(p) - 1, -1, -1):
        v = p[i]
        if v == 0:
            continue
        mono = "" if i == 0 else ("r" if i == 1 else f"r^{i}")
        mag = abs(v)
        coef = _fmt_frac(mag) if (mag != 1 or i == 0) else ""
        body = coef + ("*" if coef and mono else "") + mono
        terms.append(("- " if v < 0 else "+ ") + body)
    s = " ".join(terms)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


# --- residuals of the iterate identities -----------------------------------


def expansion_residual(g: SelfMap, n: int, x: float, scaled: bool = False, tol: Tolerance = DEFAULT_TOL) -> float:
    """g^(n+3)(x) - [a_n g^2(x) + b_n g(x) + c_n x].

    With ``scaled`` the result is divided by max(|a_n|, |b_n|, |c_n|).
    """
    t = iterate_coeffs(n)
    v = orbit(g, x, n + 3, tol).values
    r = math.fsum([v[n + 3], -float(t.a) * v[2], -float(t.b) * v[1], -float(t.c) * x])
    return r / float(t.magnitude) if scaled else r


def linear_iterate_form_residual(g: SelfMap, n: int, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """g^(n+3)(x) - [(n+3) g(x) - (n+2) x]; vanishes on increasing solutions."""
    v = orbit(g, x, n + 3, tol).values
    return math.fsum([v[n + 3], -(n + 3) * v[1], (n + 2) * x])


@dataclass(frozen=True)
class LimitReport:
    lhs_sequence: tuple  # g^(n+3)(x) / b_n for n = 0..n_max
    rhs: float  # -g^2(x)/2 + g(x) - x/2


def limit_functional(g: SelfMap, x: float, n_max: int, tol: Tolerance = DEFAULT_TOL) -> LimitReport:
    v = orbit(g, x, n_max + 3, tol).values
    seq = tuple(v[t.n + 3] / float(t.b) for t in coeff_table(n_max))
    return LimitReport(seq, -0.5 * v[2] + v[1] - 0.5 * x)


# --- the inverse recurrence x_{n+3} = 3/2 x_{n+2} - 1/2 x_n -----------------

INVERSE_POLY = CharPoly((Fraction(1, 2), 0, Fraction(-3, 2), 1))


def inverse_recurrence_step(x_n: float, x_n1: float, x_n2: float) -> float:
    return 1.5 * x_n2 - 0.5 * x_n


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(i for i in range(col, n) if m[i][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col] / m[col][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


@dataclass(frozen=True)
class ExactRecurrence:
    """x_n = sum_k coeff_k * n^power_k * root_k^n for a rational-root recurrence."""

    terms: tuple  # (root: Fraction, power: int, coeff: Fraction)
    factorization: str

    def value(self, n: int) -> float:
        return float(sum(c * n**p * r**n for r, p, c in self.terms))

    def coeff(self, root, power: int) -> Fraction:
        for r, p, c in self.terms:
            if r == root and p == power:
                return c
        raise KeyError((root, power))


def solve_recurrence(poly: CharPoly, initial: Sequence[float]) -> ExactRecurrence:
    """Closed form of a linear recurrence whose characteristic roots are rational."""
    rs = _roots_cached(poly)
    if not all(r.exact for r in rs.roots):
        raise NotImplementedError("only recurrences with rational characteristic roots are supported")
    if len(initial) != poly.degree:
        raise ValueError(f"need {poly.degree} initial values")
    basis = [(r.value, j) for r in rs.roots for j in range(r.multiplicity)]
    rows = [[Fraction(n) ** j * root**n for root, j in basis] for n in range(poly.degree)]
    coeffs = _solve_exact(rows, [Fraction(v) for v in initial])
    return ExactRecurrence(tuple((r, j, c) for (r, j), c in zip(basis, coeffs)), rs.factorization)


@lru_cache(maxsize=32)
def _roots_cached(poly: CharPoly) -> RootSet:
    return char_roots(poly)


@dataclass(frozen=True)
class RecurrenceFit:
    A: float
    B: float
    C: float
    factorization: str

    def value(self, n: int) -> float:
        return self.A * n + self.B + self.C * (-0.5) ** n


def fit_ABC(x0: float, x1: float, x2: float) -> RecurrenceFit:
    """Constants with x_n = A n + B + C (-1/2)^n for n = 0, 1, 2."""
    sol = solve_recurrence(INVERSE_POLY, (x0, x1, x2))
    one, half = Fraction(1), Fraction(-1, 2)
    return RecurrenceFit(
        float(sol.coeff(one, 1)), float(sol.coeff(one, 0)), float(sol.coeff(half, 0)), sol.factorization
    )


@dataclass(frozen=True)
class AntiMonotoneReport:
    holds: bool
    first_violation: Optional[int] = None


def anti_monotone_check(seq: Union[Orbit, Sequence[float]], atol: float = DEFAULT_TOL.atol) -> AntiMonotoneReport:
    """Whether (-1)^n (x_{n+1} - x_n) keeps one sign; |terms| <= atol count as zero."""
    xs = seq.values if isinstance(seq, Orbit) else tuple(seq)
    if len(xs) < 3:
        raise ValueError("need at least three terms")
    sign = 0
    for n in range(len(xs) - 1):
        d = (-1) ** n * (xs[n + 1] - xs[n])
        if abs(d) <= atol:
            continue
        s = 1 if d > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return AntiMonotoneReport(False, n)
    return AntiMonotoneReport(True)
