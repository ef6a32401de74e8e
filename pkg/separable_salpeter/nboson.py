"""
Energy bounds for N identical bosons with the 3D Gauss pair kernel
-v exp(-beta (r^2 + r'^2) / 2).

Everything is expressed per particle as a function of the scaled coupling
u = (N - 1) v and lambda = (N - 1) / N:

    lower bound  E_L/N: ground state of the one-body Gauss problem with coupling u/2
    upper bound  E_U/N: min over s > 0 of a scale-optimized Gaussian trial energy
                        (canonical units m = beta = 1 only)
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from scipy.special import k1, k1e

from .errors import InvalidParameter, MinimizationFailure, NoBoundState
from .kernels import gauss_problem
from .quadrature import DEFAULT_TOLERANCE, SQRT_2_OVER_PI, integrate_semi_infinite
from .spectral import critical_threshold, solve_ground_energy

logger = logging.getLogger(__name__)

# Geometric steps allowed when bracketing the variational scale
SCALE_EXPANSIONS = 60


# ============= SPECIAL FUNCTIONS =============

def bessel_k1(x):
    """
    Modified Bessel function K_1(x) for x > 0.

    Evaluated by scipy.special.k1 (Cephes): a Chebyshev expansion on (0, 2]
    built around the small-x series (log term plus 1/x pole), and an
    exponentially scaled Chebyshev expansion in 8/x - 2 above x = 2.
    """
    x = float(x)
    if not x > 0:
        raise InvalidParameter("x", f"K_1 needs x > 0, got {x}")
    return float(k1(x))


def _g_integrand(x):
    def integrand(t):
        return 2.0 * math.exp(-t * t) * math.sqrt(2.0 * x + t * t) * t * t
    return integrand


def g_of_x(x, method="closed"):
    """
    g(x) = int_{-inf}^{inf} exp(-t^2) sqrt(2x + t^2) t^2 dt = x e^x K_1(x).

    method="closed" uses the exponentially scaled Bessel function (g(0) = 1 in
    the limit); method="quadrature" evaluates the defining integral.
    """
    x = float(x)
    if x < 0:
        raise InvalidParameter("x", f"g(x) needs x >= 0, got {x}")
    if method == "quadrature":
        return integrate_semi_infinite(_g_integrand(x)).value
    if method != "closed":
        raise InvalidParameter("method", f"unknown method {method!r}")
    if x == 0.0:
        return 1.0
    return float(x * k1e(x))


# ============= SYSTEM =============

@dataclass(frozen=True)
class BosonSystem:
    """Scaled coupling u = (N - 1) v and lambda = (N - 1) / N; lambda = 1 is N -> infinity."""

    u: float
    lam: float = 0.5
    m: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.u) and self.u > 0):
            raise InvalidParameter("u", f"scaled coupling must be positive, got {self.u}")
        if not (0.5 <= self.lam <= 1.0):
            raise InvalidParameter("lambda", f"lambda must lie in [1/2, 1], got {self.lam}")
        if not (math.isfinite(self.m) and self.m > 0):
            raise InvalidParameter("mass", f"mass must be positive, got {self.m}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise InvalidParameter("beta", f"beta must be positive, got {self.beta}")

    @classmethod
    def from_particles(cls, N, v, m=1.0, beta=1.0):
        if int(N) != N or N < 2:
            raise InvalidParameter("N", f"need an integer N >= 2, got {N}")
        if not (math.isfinite(v) and v > 0):
            raise InvalidParameter("v", f"coupling must be positive, got {v}")
        return cls(u=(N - 1) * v, lam=(N - 1) / N, m=m, beta=beta)

    @property
    def canonical(self):
        return self.m == 1.0 and self.beta == 1.0


@dataclass(frozen=True)
class BoundsPoint:
    u: float
    lam: float
    lower_pp: float
    upper_pp: float
    s_star: float
    unbound: bool = False


# ============= LOWER BOUND =============

def _pair_problem(system):
    """One-body Gauss problem whose ground state is E_L/N; its coupling is u/2."""
    return gauss_problem(beta=system.beta, v=0.5 * system.u, mass=system.m)


def lower_bound_per_particle(system, tol=DEFAULT_TOLERANCE):
    """
    E_L/N from the scaled one-body problem.

    Returns m when u/2 is below the one-body critical coupling (no binding).
    """
    return _lower_bound(system, tol)[0]


def _lower_bound(system, tol):
    problem = _pair_problem(system)
    threshold = critical_threshold(problem, tol)
    if 0.5 * system.u <= threshold.critical_coupling:
        logger.debug("u = %g below 2 v_c = %g: lower bound unbound", system.u, 2 * threshold.critical_coupling)
        return system.m, True
    try:
        return solve_ground_energy(problem, tol=tol).energy, False
    except NoBoundState:
        return system.m, True


def critical_u(m=1.0, beta=1.0, tol=DEFAULT_TOLERANCE):
    """u at which E_L/N = 0: 1/u_c = (2 pi / beta^3) int exp(-k^2/beta) k^2 / sqrt(m^2 + k^2) dk."""

    def integrand(k):
        return math.exp(-k * k / beta) * k * k / math.hypot(m, k)

    reciprocal = 2.0 * math.pi / beta ** 3 * integrate_semi_infinite(integrand, tol).value
    return 1.0 / reciprocal


# ============= UPPER BOUND =============

def upper_bound_objective(s, u, lam):
    """
    Per-particle Gaussian trial energy at scale s (m = beta = 1):
    sqrt(2/pi) [g(s^2)/s - 8 u pi^2 (2 lam s^2)^(3/2) / (1 + 4 lam s^2)^3].
    """
    if not (math.isfinite(s) and s > 0):
        raise InvalidParameter("s", f"scale must be positive, got {s}")
    if not (0.5 <= lam <= 1.0):
        raise InvalidParameter("lambda", f"lambda must lie in [1/2, 1], got {lam}")
    w = 2.0 * lam * s * s
    kinetic = g_of_x(s * s) / s
    attraction = 8.0 * u * math.pi ** 2 * w ** 1.5 / (1.0 + 2.0 * w) ** 3
    return SQRT_2_OVER_PI * (kinetic - attraction)


def _bracket_scale(objective):
    """Geometric expansion from s = 1 until the middle point is lowest."""
    a, b = 1.0, 2.0
    fa, fb = objective(a), objective(b)
    if fb > fa:
        # minimum lies at smaller s
        c, fc = b, fb
        b, fb = a, fa
        a = b / 2.0
        fa = objective(a)
        for _ in range(SCALE_EXPANSIONS):
            if fa > fb:
                return a, b, c
            c, fc, b, fb = b, fb, a, fa
            a = b / 2.0
            fa = objective(a)
    else:
        c = b * 2.0
        fc = objective(c)
        for _ in range(SCALE_EXPANSIONS):
            if fc > fb:
                return a, b, c
            a, fa, b, fb = b, fb, c, fc
            c = b * 2.0
            fc = objective(c)
    raise MinimizationFailure(f"no interior minimum of the trial energy between s = {a:g} and s = {c:g}")


def upper_bound_per_particle(system):
    """
    E_U/N and the optimal scale s*, by golden-section search with parabolic steps.

    Raises:
        InvalidParameter: non-canonical units (m, beta) != (1, 1)
        MinimizationFailure: the trial energy keeps falling towards s -> 0 or s -> infinity
    """
    if not system.canonical:
        raise InvalidParameter("mass", "the Gaussian upper bound is only defined for m = beta = 1")

    def objective(s):
        return upper_bound_objective(s, system.u, system.lam)

    bracket = _bracket_scale(objective)
    result = minimize_scalar(objective, bracket=bracket, method="brent", tol=1e-10)
    if not result.success:
        raise MinimizationFailure(f"scale minimization failed: {result.message}")
    return float(result.fun), float(result.x)


# ============= JACOBI COORDINATES =============

@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    B: np.ndarray

    def is_orthogonal(self, atol=1e-12):
        return bool(np.allclose(self.B @ self.B.T, np.eye(len(self.B)), atol=atol))


def jacobi_matrix(N):
    """
    Orthogonal map to Jacobi coordinates: row 1 is the centre of mass
    (all 1/sqrt(N)); row k >= 2 has 1/sqrt(k(k-1)) in its first k-1 entries
    and -sqrt((k-1)/k) on the diagonal.
    """
    if int(N) != N or N < 2:
        raise InvalidParameter("N", f"need an integer N >= 2, got {N}")
    N = int(N)
    B = np.zeros((N, N))
    B[0, :] = 1.0 / math.sqrt(N)
    for k in range(2, N + 1):
        B[k - 1, :k - 1] = 1.0 / math.sqrt(k * (k - 1))
        B[k - 1, k - 1] = -math.sqrt((k - 1) / k)
    return JacobiMatrix(B)


# ============= BOUNDS ALONG u =============

def bounds_point(u, lam=0.5, tol=DEFAULT_TOLERANCE):
    system = BosonSystem(u=u, lam=lam)
    lower, unbound = _lower_bound(system, tol)
    upper, s_star = upper_bound_per_particle(system)
    return BoundsPoint(u=u, lam=lam, lower_pp=lower, upper_pp=upper, s_star=s_star, unbound=unbound)


def bounds_table(u_values, lams=(0.5, 1.0), tol=DEFAULT_TOLERANCE):
    """
    Lower bound and one upper bound per lambda along a u grid.

    Failed minimizations leave NaN cells.

    Returns:
        DataFrame with u, lower_pp, unbound and upper_pp / s_star columns per lambda
    """
    rows = []
    for u in u_values:
        system = BosonSystem(u=float(u))
        lower, unbound = _lower_bound(system, tol)
        row = {'u': float(u), 'lower_pp': lower, 'unbound': unbound}
        for lam in lams:
            try:
                upper, s_star = upper_bound_per_particle(BosonSystem(u=float(u), lam=lam))
            except MinimizationFailure as e:
                logger.warning("u = %g, lambda = %g: %s", u, lam, e)
                upper, s_star = np.nan, np.nan
            row[f'upper_pp_{lam:.6g}'] = upper
            row[f's_star_{lam:.6g}'] = s_star
        rows.append(row)
    return pd.DataFrame(rows)
