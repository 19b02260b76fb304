"""The multiplicative equation f^3(x) = f(x)^3 / x^2 on subintervals of (0, inf).

Conjugating by log turns it into g^3 = 3g - 2 id: if f solves it on J then
g = log o f o exp solves the additive equation on log J, and conversely.
Linear maps c*x correspond to translations by log c and c/x^2 to -2u + log c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import expr as ex
from .classify import AFFINE_NEG2, IDENTITY, TRANSLATION, FamilySet, enumerate_families
from .domain import (
    DEFAULT_TOL,
    INF,
    Affine,
    Expr,
    GridMap,
    Interval,
    PowerLaw,
    SelfMap,
    Tolerance,
    evaluate,
    sample_grid,
)
from .errors import DomainError, EscapeError, EvalError

LINEAR = "linear"
INVERSE_SQUARE = "inverse_square"
_EXPONENT = {IDENTITY: 1.0, LINEAR: 1.0, INVERSE_SQUARE: -2.0}

# log-coordinates replacing infinite ends of log J; x spans about 1e-304..1e304
LOG_WINDOW = (-700.0, 700.0)
_DIRECT_BAND = (1e-150, 1e150)


def _check_positive(J: Interval):
    if J.lo < 0 or (J.lo == 0 and J.lo_closed):
        raise DomainError(f"{J.literal()} is not contained in (0,inf)")


@dataclass(frozen=True)
class BorosFamily:
    kind: str
    c: float
    domain: Interval

    def as_map(self) -> PowerLaw:
        return PowerLaw(self.c, _EXPONENT[self.kind], self.domain)

    def label(self) -> str:
        if self.kind == IDENTITY:
            return "Identity"
        return f"{'Linear' if self.kind == LINEAR else 'InverseSquare'}{{{self.c!r}}}"


@dataclass(frozen=True)
class BorosRule:
    kind: str
    c_range: Optional[Interval] = None

    def admits(self, c: float) -> bool:
        if self.c_range is None:
            return c == 1
        return self.c_range.contains(c)

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.c_range is not None:
            out["c_range"] = self.c_range.literal()
        return out


@dataclass(frozen=True)
class BorosFamilySet:
    domain: Interval
    rules: tuple

    def rule(self, kind: str) -> Optional[BorosRule]:
        return next((r for r in self.rules if r.kind == kind), None)

    def contains(self, kind: str, c: float = 1.0) -> bool:
        if kind == IDENTITY:
            return c == 1 and (self.rule(IDENTITY) is not None or self.contains(LINEAR, 1.0))
        r = self.rule(kind)
        return r is not None and r.admits(c)

    def members(self, cs) -> list[BorosFamily]:
        cs = list(cs)
        out = []
        for r in self.rules:
            if r.c_range is None:
                out.append(BorosFamily(r.kind, 1.0, self.domain))
            else:
                out.extend(BorosFamily(r.kind, float(c), self.domain) for c in cs if r.admits(c))
        return out

    def describe(self) -> list:
        return [r.describe() for r in self.rules]


def enumerate_boros_families(J: Interval) -> BorosFamilySet:
    _check_positive(J)
    touches_zero = J.lo == 0
    if J.kind() == "degenerate" or (J.is_bounded and not touches_zero):
        rules = (BorosRule(IDENTITY),)
    elif J.is_bounded:
        rules = (BorosRule(LINEAR, Interval(0.0, 1.0, False, True)),)
    elif not touches_zero:
        rules = (BorosRule(LINEAR, Interval(1.0, INF)),)
    else:
        rules = (BorosRule(LINEAR, Interval.open(0.0, INF)), BorosRule(INVERSE_SQUARE, Interval.open(0.0, INF)))
    return BorosFamilySet(J, rules)


def conjugate_family_set(fs: FamilySet) -> BorosFamilySet:
    """Image of an additive family set under exp; parameters map c -> e^c."""
    kinds = {IDENTITY: IDENTITY, TRANSLATION: LINEAR, AFFINE_NEG2: INVERSE_SQUARE}
    rules = []
    for r in fs.rules:
        rng = None if r.c_range is None else r.c_range.exp()
        rules.append(BorosRule(kinds[r.kind], rng))
    return BorosFamilySet(fs.domain.exp(), tuple(rules))


# --- conjugation -----------------------------------------------------------


def conjugate_to_additive(f: SelfMap) -> SelfMap:
    """g = log o f o exp on log J."""
    J = f.domain
    _check_positive(J)
    I = J.log()
    if isinstance(f, PowerLaw):
        return Affine(f.exponent, math.log(f.coeff), I)
    if isinstance(f, Affine) and f.intercept == 0 and f.slope > 0:
        return Affine(1.0, math.log(f.slope), I)
    if isinstance(f, GridMap):
        raise TypeError("grid maps are not conjugated; sample the conjugate instead")
    body = ex.substitute(f.to_ast(), ex.Call("exp", ex.X))
    return Expr(ex.Call("log", body), I)


def conjugate_to_multiplicative(g: SelfMap) -> SelfMap:
    """f = exp o g o log on exp I."""
    J = g.domain.exp()
    if isinstance(g, Affine):
        try:
            coeff = math.exp(g.intercept)
        except OverflowError:
            raise EvalError(f"exp({g.intercept!r}) overflows") from None
        return PowerLaw(coeff, g.slope, J)
    if isinstance(g, GridMap):
        raise TypeError("grid maps are not conjugated; sample the conjugate instead")
    body = ex.substitute(g.to_ast(), ex.Call("log", ex.X))
    return Expr(ex.Call("exp", body), J)


# --- verification ----------------------------------------------------------


def _log_form(f: SelfMap) -> Optional[tuple[float, float]]:
    """(log coeff, exponent) when f is c*x^p, else None."""
    if isinstance(f, PowerLaw):
        return math.log(f.coeff), f.exponent
    if isinstance(f, Affine) and f.intercept == 0 and f.slope > 0:
        return math.log(f.slope), 1.0
    if isinstance(f, Expr):
        shape = ex.detect_family(f.ast)
        if shape is not None and "coeff" in shape.params:
            return math.log(shape.params["coeff"]), shape.params["exponent"]
        if shape is not None and shape.params.get("intercept") == 0 and shape.params["slope"] > 0:
            return math.log(shape.params["slope"]), 1.0
    return None


@dataclass(frozen=True)
class BorosReport:
    residual_sup: Optional[float]
    grid_size: int
    log_window: Optional[tuple]
    is_self_map: bool
    witness: Optional[float] = None
    reason: Optional[str] = None
    log_space_points: int = 0

    def passed(self, tol: float) -> bool:
        return self.residual_sup is not None and self.residual_sup <= tol


def boros_grid(J: Interval, grid_size: int, log_window: Optional[tuple] = None) -> np.ndarray:
    """exp of the additive grid on log J, so both problems see matched points."""
    I = J.log()
    w = None if I.is_bounded else (log_window or LOG_WINDOW)
    return sample_grid(I, grid_size, w)


def _scaled_gap(la: float, lb: float, u: float) -> float:
    # |e^la - e^lb| / max(1, e^(2u), e^lb), without forming the large numbers
    top = max(la, lb)
    m = max(0.0, 2.0 * u, lb)
    if top - m > 709.0:
        return math.inf
    return math.exp(top - m) * -math.expm1(-abs(la - lb))


def verify_boros(
    f: SelfMap, grid_size: int = 1001, log_window: Optional[tuple] = None, tol: Tolerance = DEFAULT_TOL
) -> BorosReport:
    """Sup of |f^3(x) x^2 - f(x)^3| / max(1, x^2, f(x)^3) over a log-spaced grid."""
    J = f.domain
    _check_positive(J)
    I = J.log()
    w = None if I.is_bounded else (log_window or LOG_WINDOW)
    us = boros_grid(J, grid_size, w)
    lf = _log_form(f)
    sup = 0.0
    n_log = 0
    for u in us:
        u = float(u)
        logs = None
        x = math.exp(u)
        if _DIRECT_BAND[0] <= x <= _DIRECT_BAND[1]:
            try:
                v = [x]
                for k in range(1, 4):
                    y = evaluate(f, v[-1], tol)
                    if y <= 0:
                        raise EvalError(f"non-positive value {y!r} at iterate {k}")
                    if not J.contains(y, closure=True, tol=tol):
                        return BorosReport(None, grid_size, w, False, x, str(EscapeError(x, k, y)))
                    v.append(y)
                logs = [math.log(t) for t in v[1:]]
            except EvalError:
                if lf is None:
                    raise
        if logs is None:
            if lf is None:
                raise EvalError(f"cannot evaluate at x=exp({u!r}) without a closed form")
            n_log += 1
            logs = []
            t = u
            for k in range(1, 4):
                t = lf[0] + lf[1] * t
                if not I.contains(t, closure=True, tol=tol):
                    return BorosReport(None, grid_size, w, False, x, f"iterate {k} leaves the domain")
                logs.append(t)
        sup = max(sup, _scaled_gap(logs[2] + 2.0 * u, 3.0 * logs[0], u))
    return BorosReport(sup, grid_size, w, True, log_space_points=n_log)
