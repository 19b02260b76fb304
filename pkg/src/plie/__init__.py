"""Solver and verifier for the iterative equation g^3(x) = 3g(x) - 2x.

The multiplicative form f^3(x) = f(x)^3 / x^2 is handled by log/exp
conjugation in :mod:`plie.boros`.
"""

from .algebra import (
    CharPoly,
    CoeffTriple,
    RootSet,
    anti_monotone_check,
    b_closed_form,
    char_roots,
    expansion_residual,
    fit_ABC,
    iterate_coeffs,
    limit_functional,
    solve_recurrence,
)
from .boros import (
    BorosFamily,
    conjugate_to_additive,
    conjugate_to_multiplicative,
    enumerate_boros_families,
    verify_boros,
)
from .classify import (
    SolutionFamily,
    babbage_residual,
    classify_candidate,
    enumerate_families,
    inverse_equation_residual,
    verify_solution,
)
from .domain import (
    REAL,
    Affine,
    GridMap,
    Interval,
    PowerLaw,
    Tolerance,
    check_self_map,
    iterate,
    map_from_text,
    orbit,
    parse_interval,
)
from .errors import ConfigError, DomainError, EscapeError, EvalError, NumericError, ParseError
from .expr import detect_family, evaluate, parse, to_text
from .solver import MonotoneGridMap, SolverConfig, falsification_suite, objective, solve

__version__ = "0.1.0"
