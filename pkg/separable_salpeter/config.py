"""
Configuration: solver defaults and the JSON run-config schema.

A run config is a single UTF-8 JSON document, for example

    {
      "dimension": "1d",
      "kinetic": {"form": "salpeter", "mass": 1.0},
      "terms": [{"v": 1.0, "f": {"type": "exponential", "a": 1.0}}],
      "coupling_scales": [1, 2, 3],
      "published_energies": [{"mass": 1.0, "energy": -0.36131}],
      "tolerance": {"absolute": 1e-12, "relative": 1e-10}
    }
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

from .errors import InvalidParameter
from .kernels import (
    Dimension,
    Exponential1D,
    Gauss3D,
    KineticForm,
    KineticVariant,
    Problem,
    SeparableTerm,
    Yamaguchi3D,
    validate_problem,
)
from .quadrature import DEFAULT_TOLERANCE, Tolerance

# ============= SOLVER DEFAULTS =============

SCAN_POINTS = 400
BRACKET_EXPANSIONS = 80
ROOT_MAXITER = 200
ROOT_XTOL = 1e-12
ROOT_RTOL = 1e-12
THRESHOLD_OFFSET = 1e-9

ORACLE_POINTS = 800
ORACLE_KMAX = 12.0

MASS_SWEEP = (0.0, 5.0, 26)
ENERGY_SWEEP = (-5.0, 0.5, 23)
U_SWEEP = (0.6, 3.0, 25)
LAMBDAS = (0.5, 1.0)
# Wavefunction table: position and momentum both sampled on this grid
PSI_GRID = (0.0, 8.0, 81)

PUBLISHED_MATCH = 1e-3
# Quoted N = 2 bound values at u = 1; they are pair totals, twice the per-particle energies
QUOTED_PAIR_TOTALS = {"lower": -2.56844, "upper": -2.5651}
SIGNIFICANT_DIGITS = 12

PROFILE_TYPES = {
    "exponential": (Exponential1D, "a"),
    "yamaguchi": (Yamaguchi3D, "beta"),
    "gauss": (Gauss3D, "beta"),
}

REPORT_FIELDS = {
    "solve": ("command", "mass", "energy", "binding", "coefficients", "det_residual",
              "consistency_residual", "quad_error", "iterations", "roots"),
    "oracle": ("command", "oracle_coarse", "oracle_fine", "extrapolated",
               "solver_energy", "deviation", "hermitian"),
    "critical": ("command", "u_c", "reciprocal_u_c"),
}


@dataclass(frozen=True)
class RunConfig:
    problem: Problem
    tolerance: Tolerance = DEFAULT_TOLERANCE
    coupling_scales: Tuple[float, ...] = (1.0,)
    published_energies: List[Tuple[float, float]] = field(default_factory=list)

    def published_energy(self, mass):
        """Published energy for this mass, if the config lists one."""
        for m, energy in self.published_energies:
            if math.isclose(m, mass, rel_tol=1e-12, abs_tol=1e-12):
                return energy
        return None


def _profile_from_dict(spec, where):
    if not isinstance(spec, dict) or "type" not in spec:
        raise InvalidParameter(where, f"{where} must be an object with a 'type'")
    kind = spec["type"]
    if kind not in PROFILE_TYPES:
        raise InvalidParameter(where, f"unknown profile type '{kind}' (expected one of {sorted(PROFILE_TYPES)})")
    cls, param = PROFILE_TYPES[kind]
    if param not in spec:
        raise InvalidParameter(param, f"{kind} profile needs '{param}'")
    return cls(float(spec[param]))


def problem_from_dict(data, allow_free=False):
    """Build and validate a Problem from the JSON schema."""
    try:
        dimension = Dimension(data.get("dimension", "1d"))
    except ValueError:
        raise InvalidParameter("dimension", f"dimension must be '1d' or '3d', got {data.get('dimension')!r}")

    kinetic_spec = data.get("kinetic", {})
    try:
        variant = KineticVariant(kinetic_spec.get("form", "salpeter"))
    except ValueError:
        raise InvalidParameter("kinetic", f"unknown kinetic form {kinetic_spec.get('form')!r}")
    kinetic = KineticForm(variant, float(kinetic_spec.get("mass", 1.0)))

    raw_terms = data.get("terms")
    if not raw_terms:
        raise InvalidParameter("terms", "config needs a non-empty 'terms' list")
    terms = []
    for i, raw in enumerate(raw_terms):
        if "v" not in raw:
            raise InvalidParameter("v", f"term {i} has no coupling 'v'")
        f = _profile_from_dict(raw.get("f"), f"terms[{i}].f")
        g = _profile_from_dict(raw["g"], f"terms[{i}].g") if "g" in raw else None
        terms.append(SeparableTerm(float(raw["v"]), f, g))

    return validate_problem(Problem(dimension, kinetic, tuple(terms)), allow_free)


def problem_to_dict(problem):
    names = {cls: (name, param) for name, (cls, param) in PROFILE_TYPES.items()}

    def profile(p):
        name, param = names[type(p)]
        return {"type": name, param: getattr(p, param)}

    terms = []
    for t in problem.terms:
        entry = {"v": t.v, "f": profile(t.f)}
        if t.g is not None:
            entry["g"] = profile(t.g)
        terms.append(entry)
    return {
        "dimension": problem.dimension.value,
        "kinetic": {"form": problem.kinetic.variant.value, "mass": problem.kinetic.mass},
        "terms": terms,
    }


def run_config_from_dict(data, allow_free=False):
    problem = problem_from_dict(data, allow_free)

    tol_spec = data.get("tolerance", {})
    tolerance = Tolerance(
        float(tol_spec.get("absolute", DEFAULT_TOLERANCE.absolute)),
        float(tol_spec.get("relative", DEFAULT_TOLERANCE.relative)),
    )

    scales = tuple(float(s) for s in data.get("coupling_scales", [1.0]))
    if not scales or any(not (s > 0) for s in scales):
        raise InvalidParameter("coupling_scales", "coupling scales must be a non-empty list of positive numbers")

    published = [(float(p["mass"]), float(p["energy"])) for p in data.get("published_energies", [])]
    return RunConfig(problem, tolerance, scales, published)


def load_run_config(path, allow_free=False):
    """Read a run config; malformed JSON is reported as InvalidParameter('config')."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidParameter("config", f"cannot read config {path}: {e}")
    if not isinstance(data, dict):
        raise InvalidParameter("config", "config must be a JSON object")
    try:
        return run_config_from_dict(data, allow_free)
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise InvalidParameter("config", f"malformed config {path}: {e}")


def load_report(text):
    """Re-parse an emitted JSON report and check it carries its command's fields."""
    report = json.loads(text)
    command = report.get("command")
    if command not in REPORT_FIELDS:
        raise InvalidParameter("command", f"unknown report command {command!r}")
    missing = [key for key in REPORT_FIELDS[command] if key not in report]
    if missing:
        raise InvalidParameter(missing[0], f"report is missing fields: {', '.join(missing)}")
    return report
