"""Residual minimization over monotone piecewise-linear self-maps.

A candidate is stored as an anchor value plus log-increments between
equispaced knots, so every parameter vector reconstructs a strictly monotone
map.  The objective is the mean square of g^3 - 3g + 2x at the knots, with
g composed by linear interpolation (clamped outside the knot range).

The search is a damped Gauss-Newton (Levenberg-Marquardt) iteration on the
residual vector with a central-difference Jacobian; all perturbed parameter
vectors are evaluated in one batched pass.  When damping saturates above the
tolerance, the run restarts from a seeded random kick of the best point.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .classify import ClassificationReport, SolutionFamily, classify_candidate
from .domain import GridMap, Interval
from .errors import ConfigError

RESIDUAL_THRESHOLD = 1e-8
DISTANCE_THRESHOLD = 1e-2
_MAX_DAMPING = 1e12
# stop a descent when the objective fell by less than this fraction over the window
_STALL_WINDOW = 30
_STALL_RATIO = 1e-3


@dataclass(frozen=True)
class SolverConfig:
    grid_size: int = 65
    max_iterations: int = 20000
    step: float = 1e-2  # initial damping; grows x4 on rejection, shrinks /3 on acceptance
    tolerance: float = 1e-10
    seed: int = 0
    monotone: bool = True
    fd_step: float = 1e-6
    min_slope: float = 0.05  # floor on increments, in units of the knot spacing
    restarts: int = 5
    kick: float = 0.3
    init_noise: float = 0.2  # fraction of the domain length
    verify_grid: int = 1001

    def __post_init__(self):
        for name in ("grid_size", "max_iterations", "verify_grid"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.grid_size < 3:
            raise ConfigError("grid_size must be at least 3")
        for name in ("step", "tolerance", "fd_step", "init_noise"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.min_slope < 1:
            raise ConfigError("min_slope must lie in (0, 1)")
        if self.restarts < 0 or self.kick < 0:
            raise ConfigError("restarts and kick must be nonnegative")
        if not -(2**63) <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")


@dataclass(frozen=True)
class MonotoneGridMap:
    lo: float
    hi: float
    anchor: float
    log_increments: tuple
    increasing: bool = True

    @property
    def m(self) -> int:
        return len(self.log_increments)

    @property
    def knots(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.m + 1)

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([[self.anchor], self.log_increments])

    @property
    def values(self) -> np.ndarray:
        return _values(self.params[None, :], 1.0 if self.increasing else -1.0)[0]

    def to_gridmap(self, domain: Interval) -> GridMap:
        return GridMap(tuple(self.knots), tuple(self.values), domain)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["log_increments"] = list(self.log_increments)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MonotoneGridMap":
        return cls(d["lo"], d["hi"], d["anchor"], tuple(d["log_increments"]), d["increasing"])

    @classmethod
    def from_values(cls, lo: float, hi: float, values, increasing: bool = True) -> "MonotoneGridMap":
        v = np.asarray(values, dtype=float)
        d = np.diff(v) * (1 if increasing else -1)
        if np.any(d <= 0):
            raise ConfigError("values are not strictly monotone in the requested direction")
        return cls(float(lo), float(hi), float(v[0]), tuple(np.log(d).tolist()), increasing)


def _values(P: np.ndarray, sign: float) -> np.ndarray:
    inc = np.exp(P[:, 1:])
    cum = np.concatenate([np.zeros((P.shape[0], 1)), np.cumsum(inc, axis=1)], axis=1)
    return P[:, :1] + sign * cum


class _Problem:
    """Batched residual evaluation on a fixed box [lo, hi] with m+1 knots."""

    def __init__(self, lo, hi, m, sign, value_lo, value_hi, min_slope):
        self.lo, self.hi, self.m, self.sign = lo, hi, m, sign
        self.h = (hi - lo) / m
        self.x = np.linspace(lo, hi, m + 1)
        self.value_lo = value_lo  # finite domain endpoints bound the values
        self.value_hi = value_hi
        self.min_inc = min_slope * self.h
        self.max_log = math.log(10.0 * (hi - lo))

    def _interp(self, V, y):
        t = (y - self.lo) / self.h
        clamped = (t < -1e-9) | (t > self.m + 1e-9)
        t = np.clip(t, 0.0, self.m)
        i = np.minimum(np.floor(t).astype(np.int64), self.m - 1)
        f = t - i
        a = np.take_along_axis(V, i, 1)
        b = np.take_along_axis(V, i + 1, 1)
        return a + f * (b - a), clamped

    def residuals_masked(self, P):
        V = _values(P, self.sign)
        g2, c1 = self._interp(V, V)
        g3, c2 = self._interp(V, g2)
        return g3 - 3.0 * V + 2.0 * self.x, c1 | c2

    def residuals(self, P):
        r, mask = self.residuals_masked(P)
        return r, mask.sum(axis=1)

    def objective(self, p) -> tuple[float, np.ndarray, int]:
        r, c = self.residuals(p[None, :])
        r = r[0]
        return float(np.mean(r * r)), r, int(c[0])

    def project(self, p):
        """Renormalize parameters so values stay in the domain closure."""
        p = p.copy()
        p[1:] = np.clip(p[1:], math.log(self.min_inc), self.max_log)
        reserve = self.m * self.min_inc
        lo, hi = self.value_lo, self.value_hi
        if self.sign > 0:
            if lo is not None:
                p[0] = max(p[0], lo)
            if hi is not None:
                p[0] = min(p[0], hi - reserve)
            room = None if hi is None else hi - p[0]
        else:
            if hi is not None:
                p[0] = min(p[0], hi)
            if lo is not None:
                p[0] = max(p[0], lo + reserve)
            room = None if lo is None else p[0] - lo
        if room is None:
            return p
        inc = np.exp(p[1:])
        for _ in range(100):
            excess = inc.sum() - room
            if excess <= 1e-15 * room:
                break
            free = inc > self.min_inc * (1 + 1e-12)
            if not free.any():
                break
            inc[free] = np.maximum(inc[free] * (1 - excess / inc[free].sum()), self.min_inc)
        p[1:] = np.log(inc)
        return p

    def random_start(self, rng, noise):
        L = self.hi - self.lo
        base = self.x if self.sign > 0 else (self.lo + self.hi - self.x)
        v = np.sort(base + noise * L * rng.uniform(-1.0, 1.0, self.m + 1))
        if self.sign < 0:
            v = v[::-1]
        d = np.maximum(np.abs(np.diff(v)), 1e-300)
        return self.project(np.concatenate([[v[0]], np.log(d)]))


@dataclass(frozen=True)
class SolveReport:
    final_residual: float
    iterations_used: int
    nearest_family: SolutionFamily
    distance_sup: float
    trace: tuple  # (iteration, objective) after every accepted step
    config: SolverConfig
    domain: Interval
    window: Optional[tuple]
    map: Optional[MonotoneGridMap]
    converged: bool
    clamped: int
    restarts_used: int
    residual_sup: Optional[float] = None
    flags: tuple = ()

    @property
    def success(self) -> bool:
        return self.final_residual < RESIDUAL_THRESHOLD and self.distance_sup < DISTANCE_THRESHOLD


def _lm(prob: _Problem, p, f, r, budget, damping, delta, trace, it0):
    n = p.size
    E = np.eye(n) * delta
    used = 0
    history = [f]
    while used < budget and f >= prob.tol:
        if len(history) > _STALL_WINDOW and history[-1] > (1 - _STALL_RATIO) * history[-1 - _STALL_WINDOW]:
            break
        R, _ = prob.residuals(np.concatenate([p + E, p - E]))
        J = ((R[:n] - R[n:]) / (2 * delta)).T
        A = J.T @ J
        grad = J.T @ r
        scale = np.diag(A) + 1e-12
        used += 1
        accepted = False
        while damping < _MAX_DAMPING:
            try:
                step = np.linalg.solve(A + damping * np.diag(scale), -grad)
            except np.linalg.LinAlgError:
                damping *= 4
                continue
            q = prob.project(p + step)
            fq, rq, _ = prob.objective(q)
            if fq < f:
                p, f, r = q, fq, rq
                damping = max(damping / 3, 1e-12)
                accepted = True
                trace.append((it0 + used, f))
                break
            damping *= 4
        if not accepted:
            break
        history.append(f)
    return p, f, r, used


def _box(domain: Interval, window):
    if domain.is_bounded:
        return domain.lo, domain.hi
    if window is None:
        raise ConfigError(f"{domain.literal()} is unbounded; supply a finite window")
    a = domain.lo if math.isfinite(domain.lo) else window[0]
    b = domain.hi if math.isfinite(domain.hi) else window[1]
    if not a < b:
        raise ConfigError(f"window {window} does not meet {domain.literal()}")
    return float(a), float(b)


def make_problem(config: SolverConfig, domain: Interval, window=None) -> _Problem:
    lo, hi = _box(domain, window)
    sign = 1.0 if config.monotone else -1.0
    vlo = domain.lo if math.isfinite(domain.lo) else None
    vhi = domain.hi if math.isfinite(domain.hi) else None
    prob = _Problem(lo, hi, config.grid_size - 1, sign, vlo, vhi, config.min_slope)
    prob.tol = config.tolerance
    return prob


def _free_problem(gm: MonotoneGridMap) -> _Problem:
    return _Problem(gm.lo, gm.hi, gm.m, 1.0 if gm.increasing else -1.0, None, None, 1e-3)


def objective(gm: MonotoneGridMap) -> float:
    """Mean square residual at the knots of ``gm``."""
    return _free_problem(gm).objective(gm.params)[0]


def objective_flagged(gm: MonotoneGridMap) -> tuple[float, int]:
    """Objective and the number of knots whose iterates were clamped."""
    f, _, c = _free_problem(gm).objective(gm.params)
    return f, c


def knot_residuals(gm: MonotoneGridMap) -> tuple[np.ndarray, np.ndarray]:
    """Per-knot residuals and the mask of knots affected by clamping."""
    r, mask = _free_problem(gm).residuals_masked(gm.params[None, :])
    return r[0], mask[0]


def solve(
    config: SolverConfig,
    domain: Interval,
    init: Optional[MonotoneGridMap] = None,
    window: Optional[tuple] = None,
) -> SolveReport:
    if domain.kind() == "degenerate":
        fam = SolutionFamily("identity", 0.0, domain)
        return SolveReport(0.0, 0, fam, 0.0, ((0, 0.0),), config, domain, None, None, True, 0, 0, 0.0)
    prob = make_problem(config, domain, window)
    rng = np.random.default_rng(config.seed)
    if init is None:
        p = prob.random_start(rng, config.init_noise)
    else:
        if init.m != prob.m or (init.increasing != (prob.sign > 0)):
            raise ConfigError("initial map does not match grid size or search direction")
        p = np.asarray(init.params, dtype=float)
    f, r, _ = prob.objective(p)
    trace = [(0, f)]
    used = 0
    p, f, r, k = _lm(prob, p, f, r, config.max_iterations, config.step, config.fd_step, trace, used)
    used += k
    restarts = 0
    while f >= config.tolerance and restarts < config.restarts and used < config.max_iterations:
        restarts += 1
        kick = config.kick * rng.standard_normal(p.size)
        kick[0] = 0.0
        q = prob.project(p + kick)
        fq, rq, _ = prob.objective(q)
        q, fq, rq, k = _lm(prob, q, fq, rq, config.max_iterations - used, config.step, config.fd_step, [], used)
        used += k
        if fq < f:
            p, f, r = q, fq, rq
            trace.append((used, f))
    gm = MonotoneGridMap(prob.lo, prob.hi, float(p[0]), tuple(float(v) for v in p[1:]), prob.sign > 0)
    f, clamped = objective_flagged(gm)
    cls: ClassificationReport = classify_candidate(gm.to_gridmap(domain), config.verify_grid, window)
    converged = f < config.tolerance
    flags = []
    if clamped:
        flags.append("clamped")
    if not config.monotone and not converged:
        flags.append("no_decreasing_solution")
    return SolveReport(
        f, used, cls.nearest_family, cls.distance_sup, tuple(trace), config, domain,
        None if domain.is_bounded else tuple(window), gm, converged, clamped, restarts,
        cls.residual_sup, tuple(flags),
    )


@dataclass(frozen=True)
class RunResult:
    seed: int
    final_residual: float
    distance_sup: float
    nearest_family: str
    iterations_used: int
    success: bool


@dataclass(frozen=True)
class FalsificationSummary:
    domain: Interval
    runs: int
    seed: int
    monotone: bool
    success_rate: float
    worst_distance: float
    min_residual: float
    results: tuple = field(default=(), compare=False)


def _run_one(args) -> RunResult:
    config, domain, window = args
    rep = solve(config, domain, window=window)
    return RunResult(
        config.seed, rep.final_residual, rep.distance_sup, rep.nearest_family.label(),
        rep.iterations_used, rep.success,
    )


def worker_count(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("PLIE_THREADS")
    cap = int(env) if env and env.isdigit() and int(env) > 0 else 1
    return max(1, min(cap, os.cpu_count() or 1))


def falsification_suite(
    domain: Interval,
    runs: int,
    seed: int,
    config: Optional[SolverConfig] = None,
    window: Optional[tuple] = None,
    workers: Optional[int] = None,
) -> FalsificationSummary:
    """Independent seeded solves (run i uses seed + i) and their success rate."""
    if runs < 1:
        raise ConfigError("runs must be at least 1")
    config = config or SolverConfig()
    jobs = [(replace(config, seed=seed + i), domain, window) for i in range(runs)]
    nw = worker_count(workers)
    if nw > 1:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    ok = sum(r.success for r in results)
    return FalsificationSummary(
        domain, runs, seed, config.monotone, ok / runs,
        max(r.distance_sup for r in results), min(r.final_residual for r in results), tuple(results),
    )
