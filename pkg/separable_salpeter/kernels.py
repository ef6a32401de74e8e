"""
Kernel catalog and problem definition.

A problem is a one-body Hamiltonian K(p) + V in one or three dimensions whose
potential has the separable kernel V(x, x') = -sum_i v_i f_i(x) g_i(x').
Profiles are stored by their momentum-space form; position-space forms are
kept for numeric cross-checks.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import InvalidParameter
from .quadrature import (
    DEFAULT_TOLERANCE,
    SQRT_2_OVER_PI,
    Tolerance,
    cosine_transform_even,
    radial_sine_transform,
)


class Dimension(Enum):
    ONE_D = "1d"
    THREE_D = "3d"

    def measure(self, k):
        """
        Weight w(k) such that the momentum integral is int_0^inf w(k) (...) dk.

        1D profiles are even, so the line integral over (-inf, inf) folds onto
        the half line with weight 2. 3D uses the radial measure 4 pi k^2.
        """
        if self is Dimension.ONE_D:
            return 2.0 * np.ones_like(np.asarray(k, dtype=float))
        k = np.asarray(k, dtype=float)
        return 4.0 * math.pi * k * k


class KineticVariant(Enum):
    SALPETER = "salpeter"
    NON_RELATIVISTIC = "nonrelativistic"


@dataclass(frozen=True)
class KineticForm:
    """Kinetic symbol K(k): sqrt(m^2 + k^2) or m + k^2 / (2m)."""

    variant: KineticVariant = KineticVariant.SALPETER
    mass: float = 1.0

    def energy(self, k):
        k = np.asarray(k, dtype=float)
        return self.mass + self.excess(k)

    def excess(self, k):
        """K(k) - m, written without cancellation."""
        k = np.asarray(k, dtype=float)
        m = self.mass
        if self.variant is KineticVariant.NON_RELATIVISTIC:
            return k * k / (2.0 * m)
        if m == 0.0:
            return np.abs(k)
        return k * k / (np.hypot(m, k) + m)

    def threshold_ratio(self, k):
        """k^2 / (K(k) - m), the regular part of the threshold integrand in 3D."""
        k = np.asarray(k, dtype=float)
        m = self.mass
        if self.variant is KineticVariant.NON_RELATIVISTIC:
            return 2.0 * m * np.ones_like(k)
        if m == 0.0:
            return np.abs(k)
        return np.hypot(m, k) + m

    @property
    def small_k_power(self):
        """Exponent q in K(k) - m ~ k^q as k -> 0."""
        if self.variant is KineticVariant.SALPETER and self.mass == 0.0:
            return 1
        return 2


# ============= MOMENTUM PROFILES =============

class MomentumProfile:
    """A kernel factor's momentum-space function f~(k)."""

    dimension: Dimension

    def __call__(self, k):
        return self.evaluate(k)

    def evaluate(self, k):
        raise NotImplementedError

    def position(self, x):
        raise NotImplementedError

    def check(self):
        """List of (field, message) pairs for invalid parameters."""
        return []


@dataclass(frozen=True)
class Exponential1D(MomentumProfile):
    """f(x) = exp(-|x|/a),  f~(k) = sqrt(2/pi) a / (1 + a^2 k^2)."""

    a: float
    dimension: Dimension = field(default=Dimension.ONE_D, init=False, repr=False)

    def evaluate(self, k):
        k = np.asarray(k, dtype=float)
        return SQRT_2_OVER_PI * self.a / (1.0 + (self.a * k) ** 2)

    def position(self, x):
        return np.exp(-np.abs(np.asarray(x, dtype=float)) / self.a)

    def check(self):
        if not (math.isfinite(self.a) and self.a > 0):
            return [("a", f"range a must be positive, got {self.a}")]
        return []


@dataclass(frozen=True)
class Yamaguchi3D(MomentumProfile):
    """f(r) = exp(-beta r) / r,  f~(k) = sqrt(2/pi) / (k^2 + beta^2)."""

    beta: float
    dimension: Dimension = field(default=Dimension.THREE_D, init=False, repr=False)

    def evaluate(self, k):
        k = np.asarray(k, dtype=float)
        return SQRT_2_OVER_PI / (k * k + self.beta ** 2)

    def position(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-self.beta * r) / r

    def check(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            return [("beta", f"inverse range beta must be positive, got {self.beta}")]
        return []


@dataclass(frozen=True)
class Gauss3D(MomentumProfile):
    """f(r) = exp(-beta r^2 / 2),  f~(k) = beta^(-3/2) exp(-k^2 / (2 beta))."""

    beta: float
    dimension: Dimension = field(default=Dimension.THREE_D, init=False, repr=False)

    def evaluate(self, k):
        k = np.asarray(k, dtype=float)
        return self.beta ** -1.5 * np.exp(-k * k / (2.0 * self.beta))

    def position(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-0.5 * self.beta * r * r)

    def check(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            return [("beta", f"width beta must be positive, got {self.beta}")]
        return []


@dataclass(frozen=True)
class NumericEven1D(MomentumProfile):
    """Even position-space function transformed numerically."""

    f: Callable[[float], float]
    tol: Tolerance = DEFAULT_TOLERANCE
    dimension: Dimension = field(default=Dimension.ONE_D, init=False, repr=False)

    def evaluate(self, k):
        transform = np.vectorize(lambda q: cosine_transform_even(self.f, q, self.tol), otypes=[float])
        out = transform(np.asarray(k, dtype=float))
        return out[()] if out.ndim == 0 else out

    def position(self, x):
        return np.vectorize(self.f, otypes=[float])(x)


@dataclass(frozen=True)
class NumericRadial3D(MomentumProfile):
    """Spherically symmetric function transformed numerically."""

    f: Callable[[float], float]
    tol: Tolerance = DEFAULT_TOLERANCE
    dimension: Dimension = field(default=Dimension.THREE_D, init=False, repr=False)

    def evaluate(self, k):
        transform = np.vectorize(lambda q: radial_sine_transform(self.f, q, self.tol), otypes=[float])
        out = transform(np.asarray(k, dtype=float))
        return out[()] if out.ndim == 0 else out

    def position(self, r):
        return np.vectorize(self.f, otypes=[float])(r)


def profile_eval(profile, k):
    """Evaluate f~(k) for k >= 0."""
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0) or not np.all(np.isfinite(k_arr)):
        raise InvalidParameter("k", f"wavenumber must be finite and non-negative, got {k}")
    value = profile.evaluate(k_arr)
    return float(value) if np.ndim(value) == 0 else value


# ============= PROBLEM DEFINITION =============

@dataclass(frozen=True)
class SeparableTerm:
    """One product term -v f(x) g(x'); g defaults to f."""

    v: float
    f: MomentumProfile
    g: Optional[MomentumProfile] = None

    @property
    def right(self):
        return self.f if self.g is None else self.g

    @property
    def symmetric(self):
        return self.g is None or self.g == self.f


@dataclass(frozen=True)
class Problem:
    dimension: Dimension
    kinetic: KineticForm
    terms: Tuple[SeparableTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def mass(self):
        return self.kinetic.mass

    @property
    def rank(self):
        return len(self.terms)

    @property
    def couplings(self):
        return np.array([t.v for t in self.terms], dtype=float)

    @property
    def symmetric(self):
        return all(t.symmetric for t in self.terms)

    def scaled(self, factor):
        """The same problem with every coupling multiplied by factor."""
        return replace(self, terms=tuple(replace(t, v=t.v * factor) for t in self.terms))

    def with_mass(self, mass):
        return replace(self, kinetic=replace(self.kinetic, mass=mass))


def check_problem(problem, allow_free=False):
    """
    Validate a problem against the kernel invariants

    Args:
        problem: Problem to check
        allow_free: accept v = 0 (free Hamiltonian), used by the discretization oracle

    Returns:
        dict with 'valid' boolean and 'errors' list of (field, message)
    """
    errors = []

    if problem.rank < 1:
        errors.append(("terms", "a problem needs at least one separable term"))

    m = problem.kinetic.mass
    if not (math.isfinite(m) and m >= 0):
        errors.append(("mass", f"mass must be finite and non-negative, got {m}"))
    elif problem.kinetic.variant is KineticVariant.NON_RELATIVISTIC and m == 0:
        errors.append(("mass", "the nonrelativistic kinetic form k^2/(2m) needs m > 0"))

    for term in problem.terms:
        if not (math.isfinite(term.v) and (term.v > 0 or (allow_free and term.v == 0))):
            errors.append(("v", f"coupling v must be positive, got {term.v}"))
        profiles = (term.f,) if term.g is None else (term.f, term.g)
        for profile in profiles:
            errors.extend(profile.check())
            if profile.dimension is not problem.dimension:
                errors.append(("dimension", f"{type(profile).__name__} is not a {problem.dimension.value} profile"))

    return {
        'valid': len(errors) == 0,
        'errors': errors
    }


def validate_problem(problem, allow_free=False):
    """Return the problem unchanged, or raise InvalidParameter naming the first bad field."""
    result = check_problem(problem, allow_free)
    if not result['valid']:
        name, message = result['errors'][0]
        raise InvalidParameter(name, message)
    return problem


def potential_kernel(problem, x, x_prime):
    """Position-space kernel V(x, x') = -sum_i v_i f_i(x) g_i(x')."""
    total = 0.0
    for term in problem.terms:
        total = total - term.v * term.f.position(x) * term.right.position(x_prime)
    return total


# ============= CATALOG SHORTCUTS =============

def salpeter(mass):
    return KineticForm(KineticVariant.SALPETER, mass)


def nonrelativistic(mass):
    return KineticForm(KineticVariant.NON_RELATIVISTIC, mass)


def exponential_problem(a=1.0, v=1.0, mass=1.0, kinetic=None):
    return Problem(Dimension.ONE_D, kinetic or salpeter(mass), (SeparableTerm(v, Exponential1D(a)),))


def two_term_exponential_problem(a=1.0, b=2.0, v_a=1.0, v_b=1.0, mass=1.0):
    terms = (SeparableTerm(v_a, Exponential1D(a)), SeparableTerm(v_b, Exponential1D(b)))
    return Problem(Dimension.ONE_D, salpeter(mass), terms)


def yamaguchi_problem(beta=1.0, v=1.0, mass=1.0, kinetic=None):
    return Problem(Dimension.THREE_D, kinetic or salpeter(mass), (SeparableTerm(v, Yamaguchi3D(beta)),))


def gauss_problem(beta=1.0, v=1.0, mass=1.0, kinetic=None):
    return Problem(Dimension.THREE_D, kinetic or salpeter(mass), (SeparableTerm(v, Gauss3D(beta)),))
