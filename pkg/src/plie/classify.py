"""Closed-form solution families of g^3 = 3g - 2 id and candidate verification.

On a bounded interval only the identity solves the equation; on a half-line
the solutions are translations x + c with c pointing into the half-line; on
the whole line translations and the maps -2x + c are the continuous
solutions.  Membership in these families is decided exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .domain import (
    DEFAULT_TOL,
    INF,
    NON_MONOTONE,
    REAL,
    Affine,
    Interval,
    SelfMap,
    Tolerance,
    check_self_map,
    evaluate_flagged,
    monotonicity_diagnosis,
    orbit,
    sample_grid,
)
from .errors import DomainError, EscapeError, EvalError

IDENTITY = "identity"
TRANSLATION = "translation"
AFFINE_NEG2 = "affine_neg2"

_SLOPE = {IDENTITY: 1.0, TRANSLATION: 1.0, AFFINE_NEG2: -2.0}


@dataclass(frozen=True)
class SolutionFamily:
    kind: str
    c: float
    domain: Interval

    def as_map(self) -> Affine:
        return Affine(_SLOPE[self.kind], self.c, self.domain)

    def label(self) -> str:
        if self.kind == IDENTITY:
            return "Identity"
        name = "Translation" if self.kind == TRANSLATION else "AffineNeg2"
        return f"{name}{{{self.c!r}}}"

    def describe(self) -> dict:
        return {"kind": self.kind, "c": self.c, "domain": self.domain.literal(), "label": self.label()}


@dataclass(frozen=True)
class FamilyRule:
    kind: str
    c_range: Optional[Interval] = None  # None: the family has no parameter

    def admits(self, c: float) -> bool:
        if self.c_range is None:
            return c == 0
        return self.c_range.contains(c)

    def project(self, c: float) -> float:
        """Nearest admissible parameter (closed ranges only)."""
        if self.c_range is None:
            return 0.0
        return min(max(c, self.c_range.lo), self.c_range.hi)

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.c_range is not None:
            out["c_range"] = self.c_range.literal()
        return out


@dataclass(frozen=True)
class FamilySet:
    domain: Interval
    rules: tuple

    def rule(self, kind: str) -> Optional[FamilyRule]:
        return next((r for r in self.rules if r.kind == kind), None)

    def contains(self, kind: str, c: float = 0.0) -> bool:
        if kind == IDENTITY:
            if c != 0:
                return False
            return self.rule(IDENTITY) is not None or self.contains(TRANSLATION, 0.0)
        r = self.rule(kind)
        return r is not None and r.admits(c)

    def members(self, cs: Iterable[float]) -> list[SolutionFamily]:
        out = []
        cs = list(cs)
        for r in self.rules:
            if r.c_range is None:
                out.append(SolutionFamily(r.kind, 0.0, self.domain))
            else:
                out.extend(SolutionFamily(r.kind, float(c), self.domain) for c in cs if r.admits(c))
        return out

    def describe(self) -> list:
        return [r.describe() for r in self.rules]


def enumerate_families(domain: Interval) -> FamilySet:
    kind = domain.kind()
    if kind in ("degenerate", "bounded"):
        rules = (FamilyRule(IDENTITY),)
    elif kind == "half-line":
        if domain.hi == INF:
            rules = (FamilyRule(TRANSLATION, Interval(0.0, INF)),)
        else:
            rules = (FamilyRule(TRANSLATION, Interval(-INF, 0.0)),)
    else:
        rules = (FamilyRule(TRANSLATION, REAL), FamilyRule(AFFINE_NEG2, REAL))
    return FamilySet(domain, rules)


# --- verification ----------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    residual_sup: Optional[float]
    grid_size: int
    window: Optional[tuple]
    is_self_map: bool
    witness: Optional[float] = None
    image: Optional[float] = None
    reason: Optional[str] = None
    monotonicity: Optional[str] = None
    monotonicity_witness: Optional[tuple] = None
    escape: Optional[dict] = None
    clamped: int = 0
    flags: tuple = ()

    def passed(self, tol: float) -> bool:
        return self.residual_sup is not None and self.residual_sup <= tol


def _effective_window(domain: Interval, window):
    return None if domain.is_bounded else (window or None)


def verify_solution(
    g: SelfMap, grid_size: int = 1001, window: Optional[tuple] = None, tol: Tolerance = DEFAULT_TOL
) -> VerificationReport:
    """Sup over the grid of |g^3(x) - 3 g(x) + 2x|, after a self-map check."""
    window = _effective_window(g.domain, window)
    flags = []
    sm = check_self_map(g, max(grid_size, 2), window, tol)
    try:
        mono = monotonicity_diagnosis(g, max(grid_size, 3), window)
        verdict, mwit = mono.verdict, mono.witness
        if verdict == NON_MONOTONE:
            flags.append("non_monotone")
    except (EvalError, DomainError):
        verdict, mwit = None, None
    if not sm.is_self_map:
        flags.append("not_self_map")
        return VerificationReport(
            None, grid_size, window, False, sm.witness, sm.image, sm.reason, verdict, mwit,
            clamped=sm.clamped, flags=tuple(flags),
        )
    sup = 0.0
    clamped = 0
    for x in sample_grid(g.domain, grid_size, window):
        x = float(x)
        v = [x]
        try:
            for k in range(1, 4):
                y, c = evaluate_flagged(g, v[-1], tol)
                clamped += c
                if not g.domain.contains(y, closure=True, tol=tol):
                    raise EscapeError(x, k, y)
                v.append(y)
        except EscapeError as err:
            flags.append("escape")
            return VerificationReport(
                None, grid_size, window, False, x, err.value, str(err), verdict, mwit,
                escape={"start": x, "step": err.step, "value": err.value}, clamped=clamped, flags=tuple(flags),
            )
        sup = max(sup, abs(math.fsum([v[3], -v[1], -v[1], -v[1], x, x])))  # exact terms
    if clamped:
        flags.append("clamped")
    return VerificationReport(sup, grid_size, window, True, None, None, None, verdict, mwit, None, clamped, tuple(flags))


def babbage_residual(g: SelfMap, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """2x - g(x) - g^2(x)."""
    v = orbit(g, x, 2, tol).values
    return math.fsum([2.0 * x, -v[1], -v[2]])


def inverse_equation_residual(G: SelfMap, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """G^3(x) - 3/2 G^2(x) + 1/2 x, the equation satisfied by inverses of solutions."""
    v = orbit(G, x, 3, tol).values
    return math.fsum([v[3], -1.5 * v[2], 0.5 * x])


def affine_inverse(g: Affine) -> Affine:
    if g.slope == 0:
        raise DomainError("constant map has no inverse")
    return Affine(1.0 / g.slope, -g.intercept / g.slope, g.domain)


# --- classification --------------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    candidate: SelfMap
    residual_sup: Optional[float]
    nearest_family: SolutionFamily
    distance_sup: float
    grid_size: int
    window: Optional[tuple] = None
    verification: Optional[VerificationReport] = None
    fits: tuple = field(default=(), compare=False)


def _fit_member(rule: FamilyRule, domain: Interval, xs: np.ndarray, ys: np.ndarray) -> SolutionFamily:
    if rule.kind == IDENTITY:
        return SolutionFamily(IDENTITY, 0.0, domain)
    c = float(np.mean(ys - _SLOPE[rule.kind] * xs))
    c = rule.project(c)
    if rule.kind == TRANSLATION and c == 0:
        return SolutionFamily(IDENTITY, 0.0, domain)
    return SolutionFamily(rule.kind, c, domain)


def distance_to_families(
    g: SelfMap, grid_size: int = 1001, window: Optional[tuple] = None, tol: Tolerance = DEFAULT_TOL
) -> list[tuple[SolutionFamily, float]]:
    """Best member of each admissible family and its sup-distance to ``g``."""
    window = _effective_window(g.domain, window)
    xs = sample_grid(g.domain, grid_size, window)
    ys = np.array([evaluate_flagged(g, float(x), tol)[0] for x in xs])
    out = []
    for rule in enumerate_families(g.domain).rules:
        fam = _fit_member(rule, g.domain, xs, ys)
        d = float(np.max(np.abs(ys - (_SLOPE[fam.kind] * xs + fam.c))))
        out.append((fam, d))
    return out


def classify_candidate(
    g: SelfMap, grid_size: int = 1001, window: Optional[tuple] = None, tol: Tolerance = DEFAULT_TOL
) -> ClassificationReport:
    window = _effective_window(g.domain, window)
    ver = verify_solution(g, grid_size, window, tol)
    fits = distance_to_families(g, grid_size, window, tol)
    fam, dist = min(fits, key=lambda t: t[1])
    return ClassificationReport(g, ver.residual_sup, fam, dist, grid_size, window, ver, tuple(fits))
