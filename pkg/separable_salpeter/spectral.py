"""
One-body solver for K(p) + V with a separable kernel.

With D(k) = K(k) - E > 0 below threshold, the bound-state momentum
wavefunction is psi~(k) = sum_i v_i f~_i(k) c_i / D(k), and the constants
c_i = int g~_i psi~ dmu are non-trivial exactly when det(I - J(E)) = 0, where

    J[j, i] = v_i * int g~_j(k) f~_i(k) dmu(k) / D(k).

For a single term this reduces to 1/v = int f~ g~ dmu / D, which is strictly
increasing in E and is inverted directly.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np
import pandas as pd
from numpy.polynomial.legendre import leggauss
from scipy import linalg
from scipy.optimize import brentq

from . import config
from .errors import ConvergenceFailure, InvalidParameter, NoBoundState, ThresholdViolation
from .kernels import Dimension, validate_problem
from .quadrature import (
    DEFAULT_TOLERANCE,
    Tolerance,
    cosine_transform_even,
    integrate_semi_infinite,
    radial_sine_transform,
)

logger = logging.getLogger(__name__)


def _gap(problem, energy):
    """m - E, which must be strictly positive."""
    gap = problem.mass - float(energy)
    if not gap > 0:
        raise ThresholdViolation(f"energy E = {energy} is not below the threshold m = {problem.mass}")
    return gap


def _overlap(problem, left, right, gap, tol):
    """int left(k) right(k) dmu(k) / (K(k) - m + gap); gap = None drops the denominator."""
    kinetic = problem.kinetic
    measure = problem.dimension.measure

    if gap is None:
        def integrand(k):
            return measure(k) * left(k) * right(k)
    else:
        def integrand(k):
            return measure(k) * left(k) * right(k) / (kinetic.excess(k) + gap)

    return integrate_semi_infinite(integrand, tol)


def _single_term(problem):
    if problem.rank != 1:
        raise InvalidParameter("terms", f"operation needs a single-term problem, got {problem.rank} terms")
    return problem.terms[0]


# ============= SECULAR EQUATION =============

def reciprocal_coupling(problem, energy, tol=DEFAULT_TOLERANCE):
    """
    1/v for which a single-term problem has an eigenvalue at `energy`.

    1D: int_{-inf}^{inf} f~ g~ dk / (K - E);  3D: 4 pi int_0^inf f~ g~ k^2 dk / (K - E).
    """
    term = _single_term(problem)
    return _overlap(problem, term.f, term.right, _gap(problem, energy), tol).value


@dataclass(eq=False)
class SecularMatrix:
    energy: float
    entries: np.ndarray
    quad_error: float

    @property
    def determinant(self):
        return float(np.linalg.det(np.eye(len(self.entries)) - self.entries))


def j_matrix(problem, energy, tol=DEFAULT_TOLERANCE):
    """The n x n matrix J(E); column i carries the coupling v_i."""
    gap = _gap(problem, energy)
    n = problem.rank
    overlaps = np.empty((n, n))
    quad_error = 0.0

    for j, row_term in enumerate(problem.terms):
        for i, col_term in enumerate(problem.terms):
            if problem.symmetric and i < j:
                overlaps[j, i] = overlaps[i, j]
                continue
            result = _overlap(problem, row_term.right, col_term.f, gap, tol)
            overlaps[j, i] = result.value
            quad_error = max(quad_error, result.error_estimate)

    entries = overlaps * problem.couplings[np.newaxis, :]
    quad_error *= float(problem.couplings.max())
    return SecularMatrix(float(energy), entries, quad_error)


def secular_determinant(problem, energy, tol=DEFAULT_TOLERANCE):
    """det(I - J(E))."""
    return j_matrix(problem, energy, tol).determinant


# ============= THRESHOLD =============

@dataclass(frozen=True)
class Threshold:
    """Limit of the reciprocal coupling as E -> m from below."""

    diverges: bool
    reciprocal_coupling: float

    @property
    def critical_coupling(self):
        """Weakest coupling that binds; 0 when every v > 0 binds."""
        return 0.0 if self.diverges else 1.0 / self.reciprocal_coupling


def critical_threshold(problem, tol=DEFAULT_TOLERANCE):
    """
    Threshold limit of 1/v for a single-term problem.

    Divergence is classified from the small-k behaviour of the integrand:
    measure ~ k^(d-1) and K(k) - m ~ k^q, so the limit is finite iff d - 1 - q > -1.
    This assumes f~(0) g~(0) != 0, which holds for every catalog profile.
    """
    term = _single_term(problem)
    dim_power = 0 if problem.dimension is Dimension.ONE_D else 2
    if dim_power - problem.kinetic.small_k_power <= -1:
        return Threshold(True, math.inf)

    kinetic = problem.kinetic

    # k^2 cancelled analytically against K(k) - m
    def integrand(k):
        return 4.0 * math.pi * term.f(k) * term.right(k) * kinetic.threshold_ratio(k)

    return Threshold(False, integrate_semi_infinite(integrand, tol).value)


# ============= BOUND STATES =============

def _psi(problem, energy, coefficients, k):
    gap = problem.mass - energy
    numerator = 0.0
    for term, c in zip(problem.terms, coefficients):
        numerator = numerator + term.v * term.f(k) * c
    return numerator / (problem.kinetic.excess(k) + gap)


@dataclass(eq=False)
class BoundState:
    """
    A solved eigenstate. coefficients are the c_i of the normalized state;
    norm_constant is the norm of psi~ built from the unit null vector.
    """

    problem: object
    energy: float
    coefficients: np.ndarray
    norm_constant: float = 1.0
    roots: Tuple[float, ...] = ()
    iterations: int = 0
    quad_error: float = 0.0
    det_residual: float = 0.0
    tol: Tolerance = field(default=DEFAULT_TOLERANCE, repr=False)

    @property
    def binding(self):
        return self.energy - self.problem.mass

    def psi_momentum(self, k):
        return _psi(self.problem, self.energy, self.coefficients, k)

    def norm_squared(self):
        measure = self.problem.dimension.measure
        return integrate_semi_infinite(lambda k: measure(k) * self.psi_momentum(k) ** 2, self.tol).value

    def psi_position(self, x):
        """Numeric inverse transform; the convention is self-inverse for even / radial functions."""
        if self.problem.dimension is Dimension.ONE_D:
            return cosine_transform_even(self.psi_momentum, x, self.tol)
        return radial_sine_transform(self.psi_momentum, abs(x), self.tol)


def _fix_phase(c):
    """Sign convention: first non-negligible component positive."""
    scale = np.max(np.abs(c))
    for value in c:
        if abs(value) > 1e-12 * scale:
            return c if value > 0 else -c
    return c


def _bound_state(problem, energy, roots, iterations, tol):
    secular = j_matrix(problem, energy, tol)
    residual_matrix = np.eye(problem.rank) - secular.entries
    _, _, vt = np.linalg.svd(residual_matrix)
    c = _fix_phase(vt[-1])

    state = BoundState(
        problem=problem,
        energy=float(energy),
        coefficients=c,
        roots=tuple(roots),
        iterations=iterations,
        quad_error=secular.quad_error,
        det_residual=abs(secular.determinant),
        tol=tol,
    )
    norm = math.sqrt(state.norm_squared())
    return replace(state, coefficients=c / norm, norm_constant=norm)


def _brent(func, lower, upper, what):
    root, info = brentq(func, lower, upper, xtol=config.ROOT_XTOL, rtol=config.ROOT_RTOL,
                        maxiter=config.ROOT_MAXITER, full_output=True, disp=False)
    if not info.converged:
        raise ConvergenceFailure(f"{what}: root iteration did not converge ({info.flag})", best_estimate=root)
    return root, info.iterations


def _threshold_offset(mass):
    return config.THRESHOLD_OFFSET * max(1.0, mass)


def _expand_below(func, mass):
    """Lower bracket end: double m - E_lo until func(E_lo) < 0."""
    delta = 1.0
    for expansion in range(config.BRACKET_EXPANSIONS):
        lower = mass - delta
        if func(lower) < 0:
            return lower, expansion + 1
        delta *= 2.0
    raise ConvergenceFailure(f"no lower bracket found down to E = {mass - delta}")


def _upper_bracket(func, mass, diverges):
    """
    Upper bracket end with func(E_hi) > 0, or None.

    A diverging threshold guarantees a root below m, so m - E_hi is halved
    until the sign flips or E_hi can no longer be told apart from m.
    """
    offset = _threshold_offset(mass)
    upper = mass - offset
    while func(upper) <= 0:
        if not diverges:
            return None
        offset *= 0.5
        upper = mass - offset
        if upper >= mass:
            return None
    return upper


def _solve_rank_one(problem, tol):
    term = problem.terms[0]
    target = 1.0 / term.v
    threshold = critical_threshold(problem, tol)
    if not threshold.diverges and target >= threshold.reciprocal_coupling:
        raise NoBoundState(
            f"coupling v = {term.v:.6g} does not bind: critical coupling v_c = {threshold.critical_coupling:.6g}",
            critical_coupling=threshold.critical_coupling,
        )

    def residual(energy):
        return reciprocal_coupling(problem, energy, tol) - target

    upper = _upper_bracket(residual, problem.mass, threshold.diverges)
    if upper is None:
        raise NoBoundState(
            f"coupling v = {term.v:.6g} binds closer to threshold than {_threshold_offset(problem.mass):.1g}",
            critical_coupling=threshold.critical_coupling,
        )
    lower, expansions = _expand_below(residual, problem.mass)
    root, iterations = _brent(residual, lower, upper, "reciprocal coupling inversion")
    logger.debug("rank-one root E=%.15g after %d expansions, %d iterations", root, expansions, iterations)
    return root, expansions + iterations


def _floor_gap(problem, tol):
    """Gap m - E at which every eigenvalue of J has modulus below one."""
    gap = 1.0
    for _ in range(config.BRACKET_EXPANSIONS):
        entries = j_matrix(problem, problem.mass - gap, tol).entries
        if np.max(np.abs(np.linalg.eigvals(entries))) < 1.0:
            return gap
        gap *= 2.0
    raise ConvergenceFailure("secular determinant floor not found")


def secular_roots(problem, tol=DEFAULT_TOLERANCE, scan_points=config.SCAN_POINTS):
    """
    Every real root of det(I - J(E)) on (E_floor, m), ascending.

    det is sampled on a grid logarithmic in m - E and each sign change is
    refined with Brent's method. Only real roots are found; for asymmetric
    kernels complex roots are not reported.

    Returns:
        (roots tuple, total root iterations)
    """
    problem = validate_problem(problem)
    mass = problem.mass
    gaps = np.geomspace(_floor_gap(problem, tol), _threshold_offset(mass), scan_points)
    energies = mass - gaps
    dets = np.array([secular_determinant(problem, e, tol) for e in energies])

    def det(energy):
        return secular_determinant(problem, energy, tol)

    roots, iterations = [], 0
    for e0, e1, d0, d1 in zip(energies[:-1], energies[1:], dets[:-1], dets[1:]):
        if d0 == 0.0:
            roots.append(float(e0))
        elif d0 * d1 < 0:
            root, n_iter = _brent(det, e0, e1, "secular determinant")
            roots.append(float(root))
            iterations += n_iter
    logger.debug("secular scan over %d points found roots %s", scan_points, roots)
    return tuple(sorted(roots)), iterations


def solve_ground_energy(problem, coupling_scale=None, tol=DEFAULT_TOLERANCE, scan_points=config.SCAN_POINTS):
    """
    Ground state of the problem, optionally with every coupling multiplied by coupling_scale.

    Raises:
        NoBoundState: the coupling is below threshold or det(I - J) never changes sign
        ConvergenceFailure: bracketing or root iteration ran out of budget
    """
    problem = validate_problem(problem)
    if coupling_scale is not None:
        problem = validate_problem(problem.scaled(coupling_scale))

    if problem.rank == 1:
        energy, iterations = _solve_rank_one(problem, tol)
        roots = (energy,)
    else:
        roots, iterations = secular_roots(problem, tol, scan_points)
        if not roots:
            raise NoBoundState("det(I - J) has no sign change below threshold")
        energy = roots[0]

    return _bound_state(problem, energy, roots, iterations, tol)


def consistency_residual(state, problem=None, tol=None):
    """
    Recompute c_i = int g~_i psi~ dmu from the wavefunction and return the largest
    deviation from the stored coefficients, relative to max |c|.
    """
    problem = problem or state.problem
    tol = tol or state.tol
    measure = problem.dimension.measure

    def psi(k):
        return _psi(problem, state.energy, state.coefficients, k)

    recomputed = np.array([
        integrate_semi_infinite(lambda k, g=term.right: measure(k) * g(k) * psi(k), tol).value
        for term in problem.terms
    ])
    scale = np.max(np.abs(state.coefficients))
    return float(np.max(np.abs(recomputed - state.coefficients)) / scale)


def coupling_curve(problem, energies, tol=DEFAULT_TOLERANCE):
    """1/v against E for a single-term problem, as a DataFrame."""
    problem = validate_problem(problem)
    rows = []
    for energy in energies:
        reciprocal = reciprocal_coupling(problem, energy, tol)
        rows.append({
            'E': float(energy),
            'e': float(energy) - problem.mass,
            'reciprocal_coupling': reciprocal,
            'coupling': 1.0 / reciprocal,
        })
    return pd.DataFrame(rows, columns=['E', 'e', 'reciprocal_coupling', 'coupling'])


# ============= CLOSED-FORM LIMITS =============

def ultrarel_exponential_reciprocal_coupling(a, e):
    """Closed-form 1/v for the 1D exponential kernel at m = 0, energy e < 0."""
    if not (math.isfinite(a) and a > 0):
        raise InvalidParameter("a", f"range a must be positive, got {a}")
    if not (math.isfinite(e) and e < 0):
        raise InvalidParameter("e", f"energy must be negative at m = 0, got {e}")
    ae = a * e
    numerator = 2 + 2 * ae ** 2 + 3 * ae * math.pi + ae ** 3 * math.pi + 4 * math.log(-ae)
    return -a * a * numerator / ((1 + ae ** 2) ** 2 * math.pi)


def infinite_mass_energy(problem, tol=DEFAULT_TOLERANCE):
    """
    m -> infinity limit of E - m: the lowest eigenvalue of -sum_i v_i |f_i><g_i|,
    from the overlap matrix M[i, j] = v_j int f~_i g~_j dmu.
    """
    problem = validate_problem(problem)
    n = problem.rank
    overlaps = np.empty((n, n))
    for i, left in enumerate(problem.terms):
        for j, right in enumerate(problem.terms):
            overlaps[i, j] = _overlap(problem, left.f, right.right, None, tol).value
    eigenvalues = np.linalg.eigvals(overlaps * problem.couplings[np.newaxis, :])
    largest = float(np.max(eigenvalues.real))
    return -largest if largest > 0 else 0.0


# ============= DISCRETIZATION ORACLE =============

@dataclass(frozen=True)
class OracleResult:
    energy: float
    hermitian: bool
    n_points: int
    k_max: float


def momentum_grid(n_points, k_max):
    """
    Gauss-Legendre nodes on [0, inf): half on [0, k_max] through a hyperbolic map
    that puts a quarter of the points below min(1, k_max/4), half on [k_max, inf)
    through k = 2 k_max / (1 - x).
    """
    if n_points < 64:
        raise InvalidParameter("n_points", f"oracle grid needs at least 64 points, got {n_points}")
    if not (math.isfinite(k_max) and k_max > 0):
        raise InvalidParameter("k_max", f"k_max must be positive, got {k_max}")

    inner = n_points // 2
    x1, w1 = leggauss(inner)
    x2, w2 = leggauss(n_points - inner)

    pa, pb = min(1.0, k_max / 4.0), k_max
    denominator = 1.0 / pa - (1.0 / pa - 2.0 / pb) * x1
    k1 = (1.0 + x1) / denominator
    weights1 = (2.0 / pa - 2.0 / pb) * w1 / denominator ** 2

    k2 = 2.0 * k_max / (1.0 - x2)
    weights2 = 2.0 * k_max * w2 / (1.0 - x2) ** 2

    return np.concatenate((k1, k2)), np.concatenate((weights1, weights2))


def oracle_discretized_energy(problem, n_points=config.ORACLE_POINTS, k_max=config.ORACLE_KMAX):
    """
    Lowest eigenvalue of the dense momentum-space Hamiltonian
    H[a, b] = K(k_a) delta_ab - sum_i v_i sqrt(W_a) f~_i(k_a) g~_i(k_b) sqrt(W_b),
    with W the quadrature weight times the measure. Couplings may be zero.

    Asymmetric kernels make H non-Hermitian; the rank-n secular problem is
    solved instead and the result is flagged with hermitian = False.
    """
    k, weights = momentum_grid(n_points, k_max)
    if not (problem.symmetric or np.all(problem.couplings == 0)):
        logger.warning("asymmetric kernel: oracle falls back to the secular solver")
        try:
            energy = solve_ground_energy(problem).energy
        except NoBoundState:
            energy = problem.mass
        return OracleResult(float(energy), False, n_points, float(k_max))

    root_w = np.sqrt(weights * problem.dimension.measure(k))
    hamiltonian = np.diag(problem.kinetic.energy(k))
    for term in problem.terms:
        hamiltonian -= term.v * np.outer(root_w * term.f(k), root_w * term.right(k))

    energy = linalg.eigh(hamiltonian, eigvals_only=True, subset_by_index=[0, 0])[0]
    return OracleResult(float(energy), True, n_points, float(k_max))


def oracle_extrapolated(problem, n_points=config.ORACLE_POINTS, k_max=config.ORACLE_KMAX):
    """Oracle energies on n and 2n points and their Richardson extrapolation (order 2)."""
    coarse = oracle_discretized_energy(problem, n_points, k_max)
    fine = oracle_discretized_energy(problem, 2 * n_points, k_max)
    extrapolated = fine.energy + (fine.energy - coarse.energy) / 3.0
    return coarse, fine, extrapolated
