"""JSON/CSV documents for every report type.

Documents are plain dicts with a ``kind`` key.  Non-finite floats never reach
the output: they are written as the strings "inf", "-inf" or "nan".
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Optional

from .algebra import CoeffTriple, RootSet, b_closed_form, b_difference
from .boros import BorosReport, enumerate_boros_families
from .classify import ClassificationReport, SolutionFamily, VerificationReport, enumerate_families
from .domain import Interval, Orbit, fmt_number
from .solver import FalsificationSummary, SolveReport, SolverConfig


def clean(obj):
    """Recursively replace non-finite floats and tuples for JSON output."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _flatten(doc, prefix=""):
    rows = []
    if isinstance(doc, dict):
        for k in sorted(doc):
            rows.extend(_flatten(doc[k], f"{prefix}{k}."))
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            rows.extend(_flatten(v, f"{prefix}{i}."))
    else:
        rows.append((prefix[:-1], doc))
    return rows


def to_csv(doc: dict) -> str:
    """The document's ``rows`` table when it has one, else flat key,value pairs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = doc.get("rows")
    if isinstance(rows, list) and rows and isinstance(rows[0], dict):
        cols = list(rows[0])
        w.writerow(cols)
        for r in clean(rows):
            w.writerow([r.get(c) for c in cols])
    else:
        w.writerow(["key", "value"])
        for k, v in _flatten(clean(doc)):
            w.writerow([k, v])
    return buf.getvalue()


def _window(w) -> Optional[list]:
    return None if w is None else [float(w[0]), float(w[1])]


def family_doc(f: SolutionFamily) -> dict:
    return f.describe()


# --- algebra ---------------------------------------------------------------


def _root_doc(r) -> dict:
    v = r.value
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag, "multiplicity": r.multiplicity, "exact": False, "pair": True,
                "text": f"{v.real!r}{'+' if v.imag >= 0 else '-'}{abs(v.imag)!r}i"}
    text = f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) and v.denominator != 1 else fmt_number(float(v))
    return {"re": float(v), "im": 0.0, "multiplicity": r.multiplicity, "exact": r.exact, "pair": False, "text": text}


def roots_doc(coeffs: tuple, rs: RootSet) -> dict:
    rows = [_root_doc(r) for r in rs.roots]
    return {
        "kind": "roots",
        "coefficients": [str(c) for c in coeffs],
        "degree": rs.degree,
        "factorization": rs.factorization,
        "rows": rows,
    }


def coeffs_doc(table: list[CoeffTriple], closed_form: bool) -> dict:
    rows = []
    for t in table:
        row = {"n": t.n, "a": t.a, "b": t.b, "c": t.c, "sum": t.a + t.b + t.c}
        if closed_form:
            cf = b_closed_form(t.n)
            row["b_closed_form"] = int(cf) if cf.denominator == 1 else str(cf)
            row["match"] = cf == t.b
            row["b_difference"] = b_difference(t.n)
        rows.append(row)
    doc = {"kind": "coeffs", "n_max": table[-1].n, "closed_form": closed_form, "rows": rows}
    if closed_form:
        doc["all_match"] = all(r["match"] for r in rows)
    return doc


def orbit_doc(g_text: str, domain: Interval, o: Orbit) -> dict:
    return {
        "kind": "orbit",
        "g": g_text,
        "interval": domain.literal(),
        "start": o.start,
        "n": len(o.values) - 1,
        "rows": [{"k": k, "value": v} for k, v in enumerate(o.values)],
    }


# --- classification --------------------------------------------------------


def verification_doc(v: VerificationReport) -> dict:
    return {
        "residual_sup": v.residual_sup,
        "grid_size": v.grid_size,
        "window": _window(v.window),
        "is_self_map": v.is_self_map,
        "witness": v.witness,
        "image": v.image,
        "reason": v.reason,
        "monotonicity": v.monotonicity,
        "monotonicity_witness": None if v.monotonicity_witness is None else list(v.monotonicity_witness),
        "escape": v.escape,
        "clamped": v.clamped,
        "flags": list(v.flags),
    }


def classification_doc(g_text: str, rep: ClassificationReport, tol: float, full: bool) -> dict:
    ver = rep.verification
    doc = {
        "kind": "classification" if full else "verification",
        "g": g_text,
        "interval": rep.candidate.domain.literal(),
        "window": _window(rep.window),
        "grid_size": rep.grid_size,
        "tol": tol,
        "residual_sup": rep.residual_sup,
        "passed": ver.passed(tol),
        "is_self_map": ver.is_self_map,
        "witness": ver.witness,
        "image": ver.image,
        "reason": ver.reason,
        "nearest_family": family_doc(rep.nearest_family),
        "distance_sup": rep.distance_sup,
        "flags": list(ver.flags),
    }
    if full:
        doc["family_set"] = enumerate_families(rep.candidate.domain).describe()
        doc["fits"] = [{"family": family_doc(f), "distance_sup": d} for f, d in rep.fits]
        doc["verification"] = verification_doc(ver)
    return doc


def boros_doc(f_text: str, domain: Interval, rep: BorosReport, tol: float, window) -> dict:
    return {
        "kind": "boros",
        "f": f_text,
        "interval": domain.literal(),
        "window": _window(window),
        "log_window": _window(rep.log_window),
        "grid_size": rep.grid_size,
        "tol": tol,
        "residual_sup": rep.residual_sup,
        "passed": rep.passed(tol),
        "is_self_map": rep.is_self_map,
        "witness": rep.witness,
        "reason": rep.reason,
        "log_space_points": rep.log_space_points,
        "family_set": enumerate_boros_families(domain).describe(),
    }


def conjugate_doc(direction: str, src_text: str, src: Interval, out_text: str, dst: Interval) -> dict:
    return {
        "kind": "conjugate",
        "direction": direction,
        "input": src_text,
        "input_interval": src.literal(),
        "output": out_text,
        "output_interval": dst.literal(),
    }


# --- solver ----------------------------------------------------------------


def config_doc(c: SolverConfig) -> dict:
    return {
        "grid_size": c.grid_size,
        "max_iterations": c.max_iterations,
        "step": c.step,
        "tolerance": c.tolerance,
        "seed": c.seed,
        "monotone": c.monotone,
        "fd_step": c.fd_step,
        "min_slope": c.min_slope,
        "restarts": c.restarts,
        "kick": c.kick,
        "init_noise": c.init_noise,
        "verify_grid": c.verify_grid,
    }


def solve_doc(rep: SolveReport) -> dict:
    return {
        "kind": "solve",
        "interval": rep.domain.literal(),
        "window": _window(rep.window),
        "config": config_doc(rep.config),
        "final_residual": rep.final_residual,
        "residual_sup": rep.residual_sup,
        "iterations_used": rep.iterations_used,
        "restarts_used": rep.restarts_used,
        "converged": rep.converged,
        "success": rep.success,
        "nearest_family": family_doc(rep.nearest_family),
        "distance_sup": rep.distance_sup,
        "clamped": rep.clamped,
        "flags": list(rep.flags),
        "map": None if rep.map is None else rep.map.to_dict(),
        "trace": [{"iteration": i, "objective": f} for i, f in rep.trace],
    }


def trace_csv(rep: SolveReport) -> str:
    return to_csv({"rows": [{"iteration": i, "objective": f} for i, f in rep.trace]})


def falsify_doc(s: FalsificationSummary, window) -> dict:
    return {
        "kind": "falsify",
        "interval": s.domain.literal(),
        "window": _window(window),
        "runs": s.runs,
        "seed": s.seed,
        "monotone": s.monotone,
        "success_rate": s.success_rate,
        "worst_distance": s.worst_distance,
        "min_residual": s.min_residual,
        "rows": [
            {
                "seed": r.seed,
                "final_residual": r.final_residual,
                "distance_sup": r.distance_sup,
                "nearest_family": r.nearest_family,
                "iterations_used": r.iterations_used,
                "success": r.success,
            }
            for r in s.results
        ],
    }


def load_schema(kind: str) -> dict:
    """The published JSON schema for documents of ``kind`` (or "error")."""
    from importlib.resources import files

    return json.loads(files("plie").joinpath("schemas", f"{kind}.schema.json").read_text())
