"""
Adaptive quadrature on semi-infinite intervals and the Fourier transforms
that carry kernel factors into momentum space.

Transform conventions (hbar = 1):
    1D even f:   f~(k) = sqrt(2/pi) * int_0^inf cos(k x) f(x) dx
    3D radial f: f~(k) = sqrt(2/pi) / k * int_0^inf sin(k r) r f(r) dr

Integrals are computed with QUADPACK through scipy.integrate.quad: a nested
Gauss-Kronrod pair per panel, worst panel bisected first.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceFailure, InvalidIntegrand, InvalidParameter

logger = logging.getLogger(__name__)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# Subdivision budget per QUADPACK call
QUAD_LIMIT = 400
# Split point used when the mapped interval alone misses the tolerance
BREAKPOINT = 1.0
# Smallest radius fed to r*f(r); keeps e^{-r}/r style factors finite at r = 0
_R_FLOOR = 1e-300


@dataclass(frozen=True)
class Tolerance:
    """Absolute and relative accuracy requested from a quadrature."""

    absolute: float = 1e-12
    relative: float = 1e-10

    def __post_init__(self):
        for name in ("absolute", "relative"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameter(name, f"tolerance '{name}' must be finite and positive, got {value}")

    def allowed(self, value):
        """Error budget for an integral of the given magnitude."""
        return max(self.absolute, self.relative * abs(value))


DEFAULT_TOLERANCE = Tolerance()


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int

    def __add__(self, other):
        return QuadratureResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            self.evaluations + other.evaluations,
        )


def _checked(integrand):
    """Wrap an integrand so that non-finite samples raise InvalidIntegrand."""

    def wrapped(x):
        y = float(integrand(x))
        if not math.isfinite(y):
            raise InvalidIntegrand(f"integrand returned {y} at x = {x!r}")
        return y

    return wrapped


def _run_quad(func, lower, upper, tol, limit, **weight):
    """One QUADPACK call; returns (QuadratureResult, message or None)."""
    value, error, info, *message = quad(
        func, lower, upper,
        epsabs=tol.absolute, epsrel=tol.relative,
        limit=limit, full_output=1, **weight,
    )
    evaluations = max(1, int(info.get("neval", 1)))
    return QuadratureResult(float(value), abs(float(error)), evaluations), (message[0] if message else None)


def _unconverged(result, tol):
    return result.error_estimate > tol.allowed(result.value)


def integrate_semi_infinite(integrand, tol=DEFAULT_TOLERANCE, limit=QUAD_LIMIT):
    """
    Integrate a function over (0, inf).

    The whole range goes to QUADPACK's mapped infinite interval first. If that
    misses the tolerance, the range is split at BREAKPOINT: [0, BREAKPOINT] is
    integrated adaptively and [BREAKPOINT, inf) on the mapped interval.

    Args:
        integrand: real function of one real variable, finite on (0, inf)
        tol: requested Tolerance
        limit: subdivision budget per QUADPACK call

    Returns:
        QuadratureResult

    Raises:
        InvalidIntegrand: a sample was NaN or infinite
        ConvergenceFailure: the error estimate exceeds the tolerance after the budget
    """
    func = _checked(integrand)
    total, message = _run_quad(func, 0.0, np.inf, tol, limit)
    if _unconverged(total, tol):
        head, head_msg = _run_quad(func, 0.0, BREAKPOINT, tol, limit)
        tail, tail_msg = _run_quad(func, BREAKPOINT, np.inf, tol, limit)
        split = head + tail
        logger.debug("mapped interval missed tolerance (%s); split at %g gives err=%.3g",
                     message, BREAKPOINT, split.error_estimate)
        if split.error_estimate < total.error_estimate:
            total, message = split, head_msg or tail_msg

    if _unconverged(total, tol):
        raise ConvergenceFailure(
            f"semi-infinite quadrature did not converge ({message})",
            best_estimate=total.value,
            error_estimate=total.error_estimate,
        )
    logger.debug("quadrature value=%.15g err=%.3g neval=%d",
                 total.value, total.error_estimate, total.evaluations)
    return total


def _fourier_integral(func, k, weight, tol, limit):
    """int_0^inf w(k x) func(x) dx with w = cos or sin, via QUADPACK's QAWF cycle summation."""
    result, message = _run_quad(func, 0.0, np.inf, tol, limit, weight=weight, wvar=k)
    if _unconverged(result, tol):
        raise ConvergenceFailure(
            f"oscillatory {weight} integral at k = {k} did not converge ({message})",
            best_estimate=result.value,
            error_estimate=result.error_estimate,
        )
    return result


def cosine_transform_even(f, k, tol=DEFAULT_TOLERANCE):
    """Momentum profile of an even position-space function (1D convention)."""
    k = abs(float(k))
    func = _checked(f)
    if k == 0.0:
        return SQRT_2_OVER_PI * integrate_semi_infinite(func, tol).value
    return SQRT_2_OVER_PI * _fourier_integral(func, k, "cos", tol, QUAD_LIMIT).value


def radial_sine_transform(f, k, tol=DEFAULT_TOLERANCE):
    """
    Momentum profile of a spherically symmetric function (3D convention).

    k = 0 uses the exact limit sqrt(2/pi) * int_0^inf r^2 f(r) dr.
    """
    k = float(k)
    if k < 0:
        raise InvalidParameter("k", f"wavenumber must be non-negative, got {k}")
    if k == 0.0:
        moment = _checked(lambda r: r * r * f(max(r, _R_FLOOR)))
        return SQRT_2_OVER_PI * integrate_semi_infinite(moment, tol).value

    def weighted(r):
        r = max(r, _R_FLOOR)
        return r * f(r)

    integral = _fourier_integral(_checked(weighted), k, "sin", tol, QUAD_LIMIT)
    return SQRT_2_OVER_PI * integral.value / k
