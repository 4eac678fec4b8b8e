"""
numerics.py
Quadrature and one-dimensional root-finding primitives with explicit
tolerance contracts. Every solver module goes through these helpers.

Semi-infinite integrals
-----------------------
    I = ∫_0^X f(x) dx  +  ∫_X^∞ f(x) dx

    The head is integrated by adaptive Gauss-Kronrod subdivision, the tail by
    the same rule after mapping [X, ∞) onto a finite interval. X is
    cut_point * scale, where scale is the natural length of the integrand
    (1 for integrands written in the dimensionless variable x of the radial
    functions).

Roots
-----
    Uniform scan for sign changes, Brent refinement (bisection/secant/inverse
    quadratic) of every bracket until its width is below tol.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from errors import InvalidBracket, NonConvergence

logger = logging.getLogger(__name__)

DEFAULT_SCAN_POINTS = 512
DEFAULT_ROOT_TOL = 1e-12

ScalarFunction = Callable[[float], float]
BatchFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Tolerance contract of integrate_semi_infinite.

    Attributes:
        relative_tolerance : target |error| / |I|
        absolute_tolerance : target |error| when I is close to zero
        max_subdivisions   : subinterval budget of each adaptive pass
        cut_point          : split point X in units of the integrand scale
        batch_subdivisions : subinterval budget of the vector-valued pass
    """

    relative_tolerance: float = 1e-12
    absolute_tolerance: float = 1e-14
    max_subdivisions: int = 200
    cut_point: float = 40.0
    batch_subdivisions: int = 5000

    def __post_init__(self):
        if not (self.relative_tolerance > 0.0 and self.absolute_tolerance > 0.0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1 or self.batch_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not self.cut_point > 0.0:
            raise ValueError("cut_point must be positive")

    def target(self, value: float) -> float:
        return max(self.relative_tolerance * abs(value), self.absolute_tolerance)


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi] over which f changes sign (or touches zero at an end)."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidBracket(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if np.sign(self.f_lo) * np.sign(self.f_hi) > 0:
            raise InvalidBracket(
                f"f has the same sign at both ends of [{self.lo}, {self.hi}]"
            )


@dataclass(frozen=True)
class RootEstimate:
    """A refined root with the scan cell it came from."""

    root: float
    residual: float
    bracket: Bracket


@dataclass(frozen=True)
class ScanMinimum:
    """Result of minimize_on_scan: location, value and the cell searched."""

    x: float
    value: float
    lo: float
    hi: float


# ----------------------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------------------

def _break_points(points, a: float, b: float) -> list[float] | None:
    """Sorted break points strictly inside (a, b), or None."""
    if points is None:
        return None
    inside = sorted({float(p) for p in np.ravel(points) if a < p < b})
    return inside or None


def _adaptive_pass(f: ScalarFunction, a: float, b: float, spec: QuadratureSpec,
                   points: list[float] | None = None):
    result = integrate.quad(
        f, a, b,
        epsabs=spec.absolute_tolerance,
        epsrel=spec.relative_tolerance,
        limit=spec.max_subdivisions,
        points=points,
        full_output=1,
    )
    value, error, info = result[0], result[1], result[2]
    if len(result) > 3:
        # quad attached a warning: accept round-off limited results that still
        # meet the contract, reject exhausted budgets
        if info.get("last", 0) >= spec.max_subdivisions or error > spec.target(value):
            raise NonConvergence(
                f"quadrature on [{a}, {b}] stopped at error {error:.3e}: {result[3]}"
            )
        logger.debug("quad on [%s, %s] warned but met tolerance: %s", a, b, result[3])
    return value, error


def integrate_semi_infinite(
    f: ScalarFunction,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    scale: float = 1.0,
    points=None,
) -> float:
    """
    Integrate f over [0, ∞).

    f must decay at least exponentially. The estimated error of the returned
    value is at most max(rel * |I|, abs); NonConvergence is raised when the
    subdivision budget runs out first. points are known locations of narrow
    features (peaks, kinks); those inside the head interval become break
    points of the first subdivision.
    """
    cut = spec.cut_point * scale
    head, head_err = _adaptive_pass(f, 0.0, cut, spec, _break_points(points, 0.0, cut))
    tail, tail_err = _adaptive_pass(f, cut, np.inf, spec)
    total = head + tail
    if head_err + tail_err > 2.0 * spec.target(total):
        raise NonConvergence(
            f"semi-infinite integral error {head_err + tail_err:.3e} above tolerance"
        )
    return total


def _vector_pass(f: BatchFunction, a: float, b: float, spec: QuadratureSpec,
                 points: list[float] | None = None) -> np.ndarray:
    value, _, info = integrate.quad_vec(
        f, a, b,
        epsabs=spec.absolute_tolerance,
        epsrel=spec.relative_tolerance,
        norm="max",
        limit=spec.batch_subdivisions,
        points=points,
        full_output=True,
    )
    if not info.success:
        raise NonConvergence(f"vector quadrature on [{a}, {b}] failed: {info.message}")
    return np.asarray(value, dtype=float)


def integrate_semi_infinite_batch(
    f: BatchFunction,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    scale: float = 1.0,
    points=None,
) -> np.ndarray:
    """
    Vector-valued version of integrate_semi_infinite.

    f(x) returns one integrand value per component (e.g. one per eta on a
    scan grid); all components share the adaptive subdivision and the error
    is controlled in the max norm. points as for integrate_semi_infinite.
    """
    cut = spec.cut_point * scale
    head = _vector_pass(f, 0.0, cut, spec, _break_points(points, 0.0, cut))
    return head + _vector_pass(f, cut, np.inf, spec)


# ----------------------------------------------------------------------------------
# Root finding
# ----------------------------------------------------------------------------------

def _scan(f: ScalarFunction, grid: np.ndarray, f_batch: BatchFunction | None) -> np.ndarray:
    if f_batch is not None:
        return np.asarray(f_batch(grid), dtype=float)
    return np.array([f(float(x)) for x in grid])


def find_roots_on_interval(
    f: ScalarFunction,
    lo: float,
    hi: float,
    scan_points: int = DEFAULT_SCAN_POINTS,
    tol: float = DEFAULT_ROOT_TOL,
    f_batch: BatchFunction | None = None,
) -> list[RootEstimate]:
    """
    All roots of f on [lo, hi] visible as sign changes on a uniform scan.

    Each bracket is refined by Brent's method until its width is below tol.
    Returns the refined roots in ascending order (empty when the scan sees no
    sign change; interpreting that is up to the caller). f_batch, when given,
    evaluates the whole scan grid in one call; refinement always uses f.
    """
    if scan_points < 8:
        raise ValueError(f"scan_points must be >= 8, got {scan_points}")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")

    grid = np.linspace(lo, hi, scan_points)
    values = _scan(f, grid, f_batch)
    roots: list[RootEstimate] = []

    for i in range(scan_points - 1):
        a, b = float(grid[i]), float(grid[i + 1])
        fa, fb = float(values[i]), float(values[i + 1])
        if fa == 0.0:
            roots.append(RootEstimate(a, 0.0, Bracket(a, b, fa, fb)))
            continue
        if fb == 0.0:
            if i == scan_points - 2:
                roots.append(RootEstimate(b, 0.0, Bracket(a, b, fa, fb)))
            continue
        if fa * fb > 0.0:
            continue
        try:
            x = optimize.brentq(f, a, b, xtol=tol, maxiter=500)
        except ValueError:
            # batch and scalar evaluations disagree on a sign at the noise level
            logger.debug("dropping bracket [%.15g, %.15g]: scalar signs agree", a, b)
            continue
        roots.append(RootEstimate(float(x), abs(f(x)), Bracket(a, b, fa, fb)))

    roots.sort(key=lambda r: r.root)
    return roots


def bisect_predicate_boundary(
    p: Callable[[float], bool],
    lo: float,
    hi: float,
    tol: float,
) -> float:
    """
    Point where a monotone predicate flips, to within tol.

    The returned x satisfies p(x) == p(lo) and lies less than tol below the
    flip. Raises InvalidBracket when p(lo) == p(hi).
    """
    if not lo < hi:
        raise InvalidBracket(f"need lo < hi, got [{lo}, {hi}]")
    p_lo = bool(p(lo))
    if bool(p(hi)) == p_lo:
        raise InvalidBracket(f"predicate has the same value ({p_lo}) at {lo} and {hi}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # tol below float resolution
        if bool(p(mid)) == p_lo:
            lo = mid
        else:
            hi = mid
    return lo


def minimize_on_scan(
    f: ScalarFunction,
    lo: float,
    hi: float,
    scan_points: int,
    tol: float,
    f_batch: BatchFunction | None = None,
) -> ScanMinimum:
    """
    Global minimum of f on [lo, hi]: scan argmin, then bounded Brent
    minimisation over the two cells around it.
    """
    grid = np.linspace(lo, hi, scan_points)
    values = _scan(f, grid, f_batch)
    i = int(np.argmin(values))
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, scan_points - 1)])

    best_x, best_value = float(grid[i]), float(values[i])
    found = optimize.minimize_scalar(f, bounds=(a, b), method="bounded",
                                     options={"xatol": tol})
    if found.success and float(found.fun) < best_value:
        best_x, best_value = float(found.x), float(found.fun)
    return ScanMinimum(best_x, best_value, a, b)
