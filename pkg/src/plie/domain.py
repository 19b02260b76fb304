"""Intervals on the extended real line and candidate self-maps.

Every map carries its domain.  ``evaluate`` accepts points of the domain's
closure; ``iterate`` and ``orbit`` raise :class:`EscapeError` at the first
iterate that leaves the closure.
"""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .errors import DomainError, EscapeError, EvalError, ParseError

INF = math.inf
DEFAULT_WINDOW = (-1e6, 1e6)


@dataclass(frozen=True)
class Tolerance:
    """Absolute plus relative slack used for every float comparison."""

    atol: float = 1e-12
    rtol: float = 1e-9

    def slack(self, scale: float) -> float:
        return self.atol + self.rtol * abs(scale)

    def close(self, a: float, b: float) -> bool:
        return abs(a - b) <= self.slack(max(abs(a), abs(b)))


DEFAULT_TOL = Tolerance()


def fmt_number(v: float) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    if float(v).is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("interval endpoints must not be NaN")
        if lo > hi or lo == INF or hi == -INF:
            raise DomainError(f"empty interval: lo={lo!r} > hi={hi!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        # an infinite endpoint is never closed
        if math.isinf(lo):
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(hi):
            object.__setattr__(self, "hi_closed", False)
        if lo == hi and not (self.lo_closed and self.hi_closed):
            raise DomainError(f"empty interval at {lo!r}")

    @classmethod
    def open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, False, False)

    def kind(self) -> str:
        if self.lo == self.hi:
            return "degenerate"
        finite = math.isfinite(self.lo) + math.isfinite(self.hi)
        return {2: "bounded", 1: "half-line", 0: "full-line"}[finite]

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x: float, closure: bool = False, tol: Optional[Tolerance] = None) -> bool:
        if math.isnan(x):
            return False
        s_lo = tol.slack(self.lo) if tol and math.isfinite(self.lo) else 0.0
        s_hi = tol.slack(self.hi) if tol and math.isfinite(self.hi) else 0.0
        if math.isinf(x):
            return False
        lo_ok = x >= self.lo - s_lo if (closure or self.lo_closed) else x > self.lo
        hi_ok = x <= self.hi + s_hi if (closure or self.hi_closed) else x < self.hi
        return lo_ok and hi_ok

    def log(self) -> "Interval":
        """Image under log; requires the interval to sit inside (0, +inf)."""
        if self.lo < 0 or (self.lo == 0 and self.lo_closed):
            raise DomainError(f"{self.literal()} is not contained in (0,inf)")
        lo = -INF if self.lo == 0 else math.log(self.lo)
        hi = math.log(self.hi) if self.hi < INF else INF
        return Interval(lo, hi, self.lo_closed, self.hi_closed)

    def exp(self) -> "Interval":
        lo = math.exp(self.lo) if self.lo > -INF else 0.0
        try:
            hi = math.exp(self.hi) if self.hi < INF else INF
        except OverflowError:
            hi = INF
        return Interval(lo, hi, self.lo_closed and self.lo > -INF, self.hi_closed)

    def literal(self) -> str:
        if self.lo == -INF and self.hi == INF:
            return "R"
        return "{}{},{}{}".format(
            "[" if self.lo_closed else "(",
            fmt_number(self.lo),
            fmt_number(self.hi),
            "]" if self.hi_closed else ")",
        )

    def __str__(self):
        return self.literal()


REAL = Interval(-INF, INF, False, False)
POSITIVE = Interval(0.0, INF, False, False)

_INTERVAL = re.compile(r"^\s*([\[(])\s*([^,\s]+)\s*,\s*([^\])\s]+)\s*([\])])\s*$")


def _endpoint(tok: str, text: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(text.find(tok), "a number or inf", repr(tok), text) from None
    if math.isnan(v):
        raise ParseError(text.find(tok), "a number or inf", repr(tok), text)
    return v


def parse_interval(text: str) -> Interval:
    """Parse ``[a,b]``, ``(a,b)``, ``[a,inf)``, ``(-inf,b]`` or ``R``."""
    if text.strip() in ("R", "ℝ"):
        return REAL
    m = _INTERVAL.match(text)
    if m is None:
        raise ParseError(0, "an interval literal such as [a,b] or R", repr(text), text)
    left, a, b, right = m.groups()
    lo, hi = _endpoint(a, text), _endpoint(b, text)
    if math.isinf(lo) and left == "[":
        raise ParseError(m.start(1), "'(' before an infinite endpoint", "'['", text)
    if math.isinf(hi) and right == "]":
        raise ParseError(m.start(4), "')' after an infinite endpoint", "']'", text)
    if lo > hi:
        raise ParseError(m.start(2), "lo <= hi", f"{a} > {b}", text)
    try:
        return Interval(lo, hi, left == "[", right == "]")
    except DomainError as err:
        raise ParseError(0, "a non-empty interval", repr(text), text) from err


def parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParseError(0, "a window 'a,b'", repr(text), text)
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise ParseError(0, "two finite numbers", repr(text), text) from None
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ParseError(0, "finite a < b", repr(text), text)
    return a, b


# --- maps ------------------------------------------------------------------


class SelfMap:
    """Base class of candidate maps; subclasses are frozen dataclasses."""

    domain: Interval

    def raw(self, x: float) -> float:
        raise NotImplementedError

    def to_ast(self) -> ex.Node:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def text(self) -> str:
        return ex.to_text(self.to_ast())


@dataclass(frozen=True)
class Affine(SelfMap):
    slope: float
    intercept: float
    domain: Interval = REAL

    def raw(self, x):
        return self.slope * x + self.intercept

    def to_ast(self):
        if self.slope == 0:
            return ex.const(self.intercept)
        if self.slope == 1:
            lin = ex.X
        elif self.slope == -1:
            lin = ex.Neg(ex.X)
        else:
            lin = ex.BinOp("*", ex.const(self.slope), ex.X)
        if self.intercept == 0:
            return lin
        if self.intercept < 0:
            return ex.BinOp("-", lin, ex.Const(-self.intercept))
        return ex.BinOp("+", lin, ex.Const(self.intercept))

    def describe(self):
        return {"type": "affine", "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class PowerLaw(SelfMap):
    """``coeff * x**exponent`` on a subinterval of [0, inf) (0 only when exponent > 0)."""

    coeff: float
    exponent: float
    domain: Interval = POSITIVE

    def __post_init__(self):
        if not self.coeff > 0:
            raise DomainError(f"PowerLaw coefficient must be positive, got {self.coeff!r}")

    def raw(self, x):
        if x == 0 and self.exponent > 0:
            return 0.0
        if x <= 0:
            raise EvalError(f"power law evaluated at non-positive {x!r}")
        try:
            return self.coeff * x**self.exponent
        except OverflowError:
            raise EvalError(f"{x!r}^{self.exponent!r} overflows") from None

    def log_raw(self, u: float) -> float:
        """log f(exp(u)), overflow-free."""
        return math.log(self.coeff) + self.exponent * u

    def to_ast(self):
        if self.exponent == 0:
            return ex.const(self.coeff)
        if self.exponent == 1:
            xp = ex.X
        elif self.exponent < 0:
            den = ex.X if self.exponent == -1 else ex.BinOp("^", ex.X, ex.const(-self.exponent))
            return ex.BinOp("/", ex.const(self.coeff), den)
        else:
            xp = ex.BinOp("^", ex.X, ex.const(self.exponent))
        return xp if self.coeff == 1 else ex.BinOp("*", ex.const(self.coeff), xp)

    def describe(self):
        return {"type": "power", "coeff": self.coeff, "exponent": self.exponent}


@dataclass(frozen=True)
class GridMap(SelfMap):
    """Piecewise-linear interpolant through (knots[i], values[i]).

    Points of the domain outside [knots[0], knots[-1]] are clamped to the
    boundary value; :func:`evaluate_flagged` reports when that happens.
    """

    knots: tuple
    values: tuple
    domain: Interval = REAL

    def __post_init__(self):
        k = tuple(float(v) for v in self.knots)
        v = tuple(float(v) for v in self.values)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)
        if len(k) < 2 or len(k) != len(v):
            raise DomainError("GridMap needs at least two knots and one value per knot")
        if any(b <= a for a, b in zip(k, k[1:])):
            raise DomainError("GridMap knots must be strictly increasing")
        if not all(self.domain.contains(t, closure=True, tol=DEFAULT_TOL) for t in k):
            raise DomainError("GridMap knots must lie in the domain")

    def raw_flagged(self, x: float) -> tuple[float, bool]:
        k, v = self.knots, self.values
        if x <= k[0]:
            return v[0], x < k[0]
        if x >= k[-1]:
            return v[-1], x > k[-1]
        i = bisect.bisect_right(k, x) - 1
        t = (x - k[i]) / (k[i + 1] - k[i])
        return v[i] + t * (v[i + 1] - v[i]), False

    def raw(self, x):
        return self.raw_flagged(x)[0]

    def to_ast(self):
        raise TypeError("grid maps have no closed-form expression")

    def text(self):
        return f"<grid map, {len(self.knots)} knots>"

    def describe(self):
        return {"type": "grid", "knots": list(self.knots), "values": list(self.values)}


@dataclass(frozen=True)
class Expr(SelfMap):
    ast: ex.Node
    domain: Interval = REAL
    source: Optional[str] = field(default=None, compare=False)

    def raw(self, x):
        return ex.evaluate(self.ast, x)

    def to_ast(self):
        return self.ast

    def describe(self):
        return {"type": "expr", "expr": ex.to_text(self.ast)}


def identity(domain: Interval = REAL) -> Affine:
    return Affine(1.0, 0.0, domain)


def map_from_text(text: str, domain: Interval) -> SelfMap:
    """Parse a user expression; recognized affine/power shapes become closed forms."""
    ast = ex.parse(text)
    shape = ex.detect_family(ast)
    if shape is not None:
        p = shape.params
        if "slope" in p:
            return Affine(p["slope"], p["intercept"], domain)
        if domain.lo >= 0 and p["coeff"] > 0:
            return PowerLaw(p["coeff"], p["exponent"], domain)
    return Expr(ast, domain, text)


def evaluate(g: SelfMap, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    if not g.domain.contains(x, closure=True, tol=tol):
        raise DomainError(f"{x!r} is outside {g.domain.literal()}", x=x)
    try:
        y = g.raw(x)
    except (OverflowError, ZeroDivisionError) as err:
        raise EvalError(str(err)) from None
    if not math.isfinite(y):
        raise EvalError(f"value at {x!r} is not finite")
    return y


def evaluate_flagged(g: SelfMap, x: float, tol: Tolerance = DEFAULT_TOL) -> tuple[float, bool]:
    """Like :func:`evaluate`, also returning whether a grid map clamped ``x``."""
    if isinstance(g, GridMap):
        if not g.domain.contains(x, closure=True, tol=tol):
            raise DomainError(f"{x!r} is outside {g.domain.literal()}", x=x)
        return g.raw_flagged(x)
    return evaluate(g, x, tol), False


def iterate(g: SelfMap, n: int, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    if n < 0:
        raise ValueError("iteration count must be nonnegative")
    if not g.domain.contains(x, closure=True, tol=tol):
        raise EscapeError(x, 0, x)
    start = x
    for k in range(1, n + 1):
        x = evaluate(g, x, tol)
        if not g.domain.contains(x, closure=True, tol=tol):
            raise EscapeError(start, k, x)
    return x


@dataclass(frozen=True)
class Orbit:
    start: float
    values: tuple

    def __len__(self):
        return len(self.values)


def orbit(g: SelfMap, x: float, n: int, tol: Tolerance = DEFAULT_TOL) -> Orbit:
    """The values x, g(x), ..., g^n(x)."""
    if not g.domain.contains(x, closure=True, tol=tol):
        raise EscapeError(x, 0, x)
    vals = [x]
    for k in range(1, n + 1):
        y = evaluate(g, vals[-1], tol)
        if not g.domain.contains(y, closure=True, tol=tol):
            raise EscapeError(x, k, y)
        vals.append(y)
    return Orbit(x, tuple(vals))


# --- grids and diagnostics -------------------------------------------------


def sample_grid(domain: Interval, n: int, window: Optional[tuple] = None) -> np.ndarray:
    """``n`` sample points of ``domain``.

    Bounded domains get an equispaced grid.  Infinite endpoints are replaced by
    the window (default ``DEFAULT_WINDOW``) and points are equispaced in
    arctan, which concentrates them where the map is usually interesting.
    Open endpoints are dropped, shifting the grid inward by one step.
    """
    if n < 1:
        raise ValueError("grid size must be positive")
    if domain.kind() == "degenerate":
        return np.array([domain.lo])
    w = DEFAULT_WINDOW if window is None else window
    bounded = domain.is_bounded
    a = domain.lo if math.isfinite(domain.lo) else w[0]
    b = domain.hi if math.isfinite(domain.hi) else w[1]
    if not a < b:
        raise DomainError(f"window {w} does not meet {domain.literal()}")
    drop_lo = a == domain.lo and not domain.lo_closed
    drop_hi = b == domain.hi and not domain.hi_closed
    k = n + drop_lo + drop_hi
    if k == 1:
        return np.array([a])
    if bounded:
        pts = np.linspace(a, b, k)
    else:
        pts = np.tan(np.linspace(math.atan(a), math.atan(b), k))
        pts[0], pts[-1] = a, b
    return pts[int(drop_lo): k - int(drop_hi)]


@dataclass(frozen=True)
class SelfMapReport:
    is_self_map: bool
    witness: Optional[float] = None
    image: Optional[float] = None
    reason: Optional[str] = None
    clamped: int = 0


def check_self_map(
    g: SelfMap, grid_size: int, window: Optional[tuple] = None, tol: Tolerance = DEFAULT_TOL
) -> SelfMapReport:
    """First grid sample whose image leaves the domain closure, if any."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    clamped = 0
    for x in sample_grid(g.domain, grid_size, window):
        x = float(x)
        try:
            y, c = evaluate_flagged(g, x, tol)
        except (EvalError, DomainError) as err:
            return SelfMapReport(False, x, None, f"evaluation failed: {err}", clamped)
        clamped += c
        if not g.domain.contains(y, closure=True, tol=tol):
            return SelfMapReport(False, x, y, "image outside domain", clamped)
    return SelfMapReport(True, clamped=clamped)


INCREASING = "strictly increasing"
DECREASING = "strictly decreasing"
NON_MONOTONE = "non-monotone"


@dataclass(frozen=True)
class Monotonicity:
    verdict: str
    witness: Optional[tuple] = None


def monotonicity_diagnosis(
    g: SelfMap, grid_size: int, window: Optional[tuple] = None
) -> Monotonicity:
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    xs = [float(t) for t in sample_grid(g.domain, grid_size, window)]
    ys = [evaluate(g, x) for x in xs]
    if len(xs) < 2:
        return Monotonicity(INCREASING)
    d = [b - a for a, b in zip(ys, ys[1:])]
    if all(v > 0 for v in d):
        return Monotonicity(INCREASING)
    if all(v < 0 for v in d):
        return Monotonicity(DECREASING)
    sign = None
    for i, v in enumerate(d):
        s = (v > 0) - (v < 0)
        if s == 0:
            j = max(0, min(i, len(xs) - 3))
            return Monotonicity(NON_MONOTONE, tuple(xs[j: j + 3]))
        if sign is not None and s != sign:
            return Monotonicity(NON_MONOTONE, (xs[i - 1], xs[i], xs[i + 1]))
        sign = s
    raise AssertionError("unreachable")
