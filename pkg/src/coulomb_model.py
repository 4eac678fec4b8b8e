"""
coulomb_model.py
Analytic side of the hydrogenlike atom with noncommuting coordinates and
momenta of different particles.

Units: lengths in ħ/(μc), energies in μc², forces in F₀ = (μc²)²/(ħc).

Model
-----
    Radial function at fixed η = 1 - ε (Schrödinger form with the kinetic
    term scaled by η²):

        χ_nl(r) = N_nl r^{l+1} F(-n+l+1, 2l+2, 2kr) exp(-kr),   k = αZ / (n η²)

    Self-consistency (ε̂(r) = F/(F + F₀) with |F| = αZ/r²) reduces to

        η = g(η) = S_nl ∫_0^∞ x^{2l+2} e^{-x} F²(x) [1 + 4(αZ)³/(n²η⁴x²)]^{-1} dx

    g is increasing in η and bounded by 1; for αZ below a critical value the
    curve crosses the diagonal twice and the physical solution is the root
    closer to η = 1.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache, partial

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from errors import InvalidDegree, InvalidQuantumNumbers, NoBoundState, NotNormalized
from numerics import (
    DEFAULT_QUADRATURE,
    DEFAULT_ROOT_TOL,
    DEFAULT_SCAN_POINTS,
    QuadratureSpec,
    find_roots_on_interval,
    bisect_predicate_boundary,
    integrate_semi_infinite,
    integrate_semi_infinite_batch,
    minimize_on_scan,
)

logger = logging.getLogger(__name__)

ETA_MIN = 0.01                 # lower end of the η scan
TANGENCY_TOL = 1e-6            # roots closer than this in η are one tangent root
EXISTENCE_SCAN_POINTS = 64     # coarse scan for the existence predicate
DEFAULT_CRIT_TOL = 1e-7
NORMALIZATION_TOL = 1e-8

SPECTROSCOPIC = "SPDFGHIKLMNOQRTUV"


# ----------------------------------------------------------------------------------
# Domain types
# ----------------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class QuantumNumbers:
    """Principal and orbital quantum numbers of one bound state."""

    n: int
    l: int

    def __post_init__(self):
        if isinstance(self.n, bool) or isinstance(self.l, bool):
            raise InvalidQuantumNumbers("quantum numbers must be integers")
        if int(self.n) != self.n or int(self.l) != self.l:
            raise InvalidQuantumNumbers(f"quantum numbers must be integers, got ({self.n}, {self.l})")
        if self.n < 1:
            raise InvalidQuantumNumbers(f"n must be >= 1, got {self.n}")
        if not 0 <= self.l <= self.n - 1:
            raise InvalidQuantumNumbers(f"l must lie in [0, n-1] = [0, {self.n - 1}], got {self.l}")

    @property
    def nodes(self) -> int:
        return self.n - self.l - 1

    @property
    def label(self) -> str:
        """Column suffix, e.g. '21' for n=2, l=1."""
        return f"{self.n}{self.l}"

    def __str__(self) -> str:
        letter = SPECTROSCOPIC[self.l] if self.l < len(SPECTROSCOPIC) else f"[l={self.l}]"
        return f"{self.n}{letter}"


@dataclass(frozen=True)
class Coupling:
    """Dimensionless interaction constant αZ."""

    alphaZ: float

    def __post_init__(self):
        if not (math.isfinite(self.alphaZ) and self.alphaZ > 0.0):
            raise ValueError(f"alphaZ must be finite and > 0, got {self.alphaZ!r}")


class Branch(str, Enum):
    UPPER_ROOT = "UpperRoot"
    TANGENT = "Tangent"


@dataclass(frozen=True)
class EtaSolution:
    """
    Converged root of g(η) = η.

    Attributes:
        eta        : selected root (the largest one)
        epsilon    : 1 - eta
        residual   : |g(eta) - eta|
        root_count : roots found on the scan domain (eta_min, 1]
        branch     : UpperRoot, or Tangent when the two roots have merged
        roots      : all roots found, ascending
    """

    eta: float
    epsilon: float
    residual: float
    root_count: int
    branch: Branch
    roots: tuple[float, ...] = field(default=())


@dataclass(frozen=True)
class RadialState:
    """Normalised analytic radial function χ_nl at fixed η."""

    qn: QuantumNumbers
    coupling: Coupling
    eta: float
    normalization: float
    length_scale: float            # 1/k = n η² / αZ

    @classmethod
    def build(cls, qn: QuantumNumbers, coupling: Coupling, eta: float) -> "RadialState":
        _check_eta(eta)
        length = qn.n * eta * eta / coupling.alphaZ
        two_k = 2.0 / length
        n, l = qn.n, qn.l
        norm = (
            math.sqrt(math.factorial(n + l) / (2 * n * math.factorial(n - l - 1)))
            / math.factorial(2 * l + 1)
            * two_k ** (l + 1.5)
        )
        return cls(qn, coupling, eta, norm, length)


def _check_eta(eta: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta!r}")


# ----------------------------------------------------------------------------------
# Special functions and prefactors
# ----------------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _hypergeometric_fractions(a: int, b: int) -> tuple[Fraction, ...]:
    """Exact coefficients (a)_k / ((b)_k k!) of the terminating series."""
    coeffs = [Fraction(1)]
    for k in range(-a):
        coeffs.append(coeffs[-1] * Fraction(a + k, (b + k) * (k + 1)))
    return tuple(coeffs)


@lru_cache(maxsize=None)
def _hypergeometric_coefficients(a: int, b: int) -> np.ndarray:
    coeffs = np.array([float(c) for c in _hypergeometric_fractions(a, b)])
    coeffs.setflags(write=False)
    return coeffs


def confluent_hypergeometric_poly(a: int, b: int, x):
    """
    Terminating confluent hypergeometric function F(a, b, x), a <= 0.

    Evaluated by Horner's rule on precomputed rational coefficients; x may be
    a scalar or an array.
    """
    if int(a) != a or a > 0:
        raise InvalidDegree(f"series terminates only for non-positive integer a, got {a}")
    if int(b) != b or b < 1:
        raise InvalidDegree(f"b must be a positive integer, got {b}")
    return np.polynomial.polynomial.polyval(x, _hypergeometric_coefficients(int(a), int(b)))


@lru_cache(maxsize=None)
def _snl_exact(n: int, l: int) -> Fraction:
    return Fraction(
        math.factorial(n + l),
        math.factorial(2 * l + 1) ** 2 * 2 * n * math.factorial(n - l - 1),
    )


def snl_factor(qn: QuantumNumbers) -> float:
    """S_nl = [(2l+1)!]^-2 [2n (n-l-1)!]^-1 (n+l)!"""
    return float(_snl_exact(qn.n, qn.l))


def radial_chi(state: RadialState, r):
    """χ_nl(r) of the analytic state; r scalar or array, r >= 0."""
    qn = state.qn
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("r must be non-negative")
    k = 1.0 / state.length_scale
    poly = confluent_hypergeometric_poly(-qn.nodes, 2 * qn.l + 2, 2.0 * k * r)
    chi = state.normalization * r ** (qn.l + 1) * poly * np.exp(-k * r)
    return float(chi) if chi.ndim == 0 else chi


def radial_norm(state: RadialState, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """∫ χ² dr by quadrature (1 for a correct state)."""
    return integrate_semi_infinite(
        lambda r: radial_chi(state, r) ** 2, quad, scale=0.5 * state.length_scale
    )


# ----------------------------------------------------------------------------------
# Self-consistency integral
# ----------------------------------------------------------------------------------

def _force_parameter(eta, qn: QuantumNumbers, c: Coupling):
    """a = 4(αZ)³ / (n² η⁴), so that F/F₀ = a / x²."""
    eta = np.asarray(eta, dtype=float)
    return 4.0 * c.alphaZ ** 3 / (qn.n ** 2 * eta ** 4)


def _density(x, qn: QuantumNumbers):
    """S_nl x^{2l+2} e^{-x} F²: the radial density in the variable x (integrates to 1)."""
    poly = confluent_hypergeometric_poly(-qn.nodes, 2 * qn.l + 2, x)
    return snl_factor(qn) * x ** (2 * qn.l + 2) * np.exp(-x) * poly * poly


def _rhs_integrand(x, qn, a):
    return _density(x, qn) * (x * x / (x * x + a))


def _epsilon_integrand(x, qn, a):
    return _density(x, qn) * (a / (x * x + a))


def rhs_eta(eta: float, qn: QuantumNumbers, c: Coupling,
            quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Right-hand side g(η) of the self-consistency equation."""
    _check_eta(eta)
    a = float(_force_parameter(eta, qn, c))
    # the force factor switches on around x = sqrt(a)
    return integrate_semi_infinite(partial(_rhs_integrand, qn=qn, a=a), quad,
                                   points=[math.sqrt(a)])


def epsilon_integral(eta: float, qn: QuantumNumbers, c: Coupling,
                     quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """
    1 - g(η) computed directly.

    The integrand is positive, so the result keeps full relative precision
    even when it is many orders below one (weak coupling, η close to 1).
    """
    _check_eta(eta)
    a = float(_force_parameter(eta, qn, c))
    return integrate_semi_infinite(partial(_epsilon_integrand, qn=qn, a=a), quad,
                                   points=[math.sqrt(a)])


def rhs_curve(etas, qn: QuantumNumbers, c: Coupling,
              quad: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """g(η) on an array of η in a single vector quadrature pass."""
    etas = np.asarray(etas, dtype=float)
    if np.any(etas <= 0.0) or np.any(etas > 1.0):
        raise ValueError("eta values must lie in (0, 1]")
    a = _force_parameter(etas, qn, c)
    return integrate_semi_infinite_batch(lambda x: _rhs_integrand(x, qn, a), quad,
                                         points=np.sqrt(a))


def _defect(eta: float, qn: QuantumNumbers, c: Coupling, quad: QuadratureSpec) -> float:
    """η - g(η), written as ε(η) - (1 - η)."""
    return epsilon_integral(eta, qn, c, quad) - (1.0 - eta)


def _defect_batch(etas: np.ndarray, qn: QuantumNumbers, c: Coupling,
                  quad: QuadratureSpec) -> np.ndarray:
    a = _force_parameter(etas, qn, c)
    eps = integrate_semi_infinite_batch(lambda x: _epsilon_integrand(x, qn, a), quad,
                                        points=np.sqrt(a))
    return eps - (1.0 - etas)


def defect_minimum(qn: QuantumNumbers, c: Coupling,
                   quad: QuadratureSpec = DEFAULT_QUADRATURE,
                   scan_points: int = EXISTENCE_SCAN_POINTS,
                   eta_min: float = ETA_MIN,
                   tol: float = 1e-10):
    """
    min over η of η - g(η), with its location.

    Zero means the curve g touches the diagonal (critical coupling); a
    negative value means two roots exist.
    """
    return minimize_on_scan(
        partial(_defect, qn=qn, c=c, quad=quad),
        eta_min, 1.0, scan_points, tol,
        f_batch=partial(_defect_batch, qn=qn, c=c, quad=quad),
    )


def bound_state_exists(qn: QuantumNumbers, c: Coupling,
                       quad: QuadratureSpec = DEFAULT_QUADRATURE) -> bool:
    """Existence predicate: max_η (g(η) - η) >= 0."""
    return defect_minimum(qn, c, quad).value <= 0.0


# ----------------------------------------------------------------------------------
# Solvers
# ----------------------------------------------------------------------------------

def solve_eta(qn: QuantumNumbers, c: Coupling,
              quad: QuadratureSpec = DEFAULT_QUADRATURE,
              tol: float = DEFAULT_ROOT_TOL,
              scan_points: int = DEFAULT_SCAN_POINTS,
              eta_min: float = ETA_MIN) -> EtaSolution:
    """
    Physical root of g(η) = η.

    All roots on (eta_min, 1] are located by scan + Brent refinement and the
    largest one is kept. When the scan sees no sign change the minimum of
    η - g(η) is located explicitly: a non-positive minimum means the two
    roots sit inside one scan cell (near tangency) and they are refined on
    either side of it. Raises NoBoundState when the minimum is positive.
    """
    defect = partial(_defect, qn=qn, c=c, quad=quad)
    batch = partial(_defect_batch, qn=qn, c=c, quad=quad)

    roots = [r.root for r in find_roots_on_interval(defect, eta_min, 1.0, scan_points, tol, batch)]
    touched = False

    if not roots:
        dip = minimize_on_scan(defect, eta_min, 1.0, scan_points, min(tol, 1e-10), batch)
        if dip.value > 0.0:
            raise NoBoundState(
                f"no self-consistent {qn} state at alphaZ={c.alphaZ:.9g} "
                f"(min of eta - g(eta) = {dip.value:.3e})"
            )
        touched = True
        if dip.value == 0.0:
            roots = [dip.x]
        else:
            roots = _split_dip(defect, dip, tol)
        logger.debug("%s at alphaZ=%.9g: near-tangent dip %.3e at eta=%.9f",
                     qn, c.alphaZ, dip.value, dip.x)

    roots.sort()
    eta = roots[-1]
    merged = len(roots) >= 2 and roots[-1] - roots[-2] < TANGENCY_TOL
    branch = Branch.TANGENT if (touched and len(roots) < 2) or merged else Branch.UPPER_ROOT
    return EtaSolution(
        eta=eta,
        epsilon=1.0 - eta,
        residual=abs(defect(eta)),
        root_count=len(roots),
        branch=branch,
        roots=tuple(roots),
    )


def _split_dip(defect, dip, tol: float) -> list[float]:
    found = []
    for a, b in ((dip.lo, dip.x), (dip.x, dip.hi)):
        if b > a and defect(a) > 0.0:
            found.append(float(brentq(defect, a, b, xtol=tol)))
    return found or [dip.x]


def critical_coupling(qn: QuantumNumbers, tol: float = DEFAULT_CRIT_TOL,
                      quad: QuadratureSpec = DEFAULT_QUADRATURE) -> Coupling:
    """
    Largest αZ for which the state still exists, to within tol.

    Bisection on the existence predicate; the returned coupling is on the
    existing side of the boundary.
    """
    def exists(alphaZ: float) -> bool:
        return bound_state_exists(qn, Coupling(alphaZ), quad)

    lo, hi = 0.05, 0.5
    while exists(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e3:
            raise NoBoundState(f"no critical coupling found for {qn} below alphaZ={hi}")
    boundary = bisect_predicate_boundary(exists, lo, hi, tol)
    logger.debug("critical coupling of %s: %.9f", qn, boundary)
    return Coupling(boundary)


def small_coupling_coefficient(qn: QuantumNumbers) -> float:
    """
    K_nl of the weak-coupling law ε_nl → K_nl (αZ)³.

    First order in a = 4(αZ)³/n²: ε ≈ a S_nl ∫ x^{2l} e^{-x} F² dx, evaluated
    exactly with ∫ x^m e^{-x} dx = m!.
    """
    coeffs = _hypergeometric_fractions(-qn.nodes, 2 * qn.l + 2)
    integral = Fraction(0)
    for i, ci in enumerate(coeffs):
        for j, cj in enumerate(coeffs):
            integral += ci * cj * math.factorial(2 * qn.l + i + j)
    return float(Fraction(4, qn.n ** 2) * _snl_exact(qn.n, qn.l) * integral)


# ----------------------------------------------------------------------------------
# Noncommutativity operator on a density
# ----------------------------------------------------------------------------------

def epsilon_operator(force, f0: float = 1.0):
    """ε̂(|F|) = |F| / (|F| + F₀); an infinite force maps to 1."""
    force = np.asarray(force, dtype=float)
    with np.errstate(invalid="ignore"):
        value = np.where(np.isinf(force), 1.0, force / (force + f0))
    return float(value) if value.ndim == 0 else value


def epsilon_from_density(r, chi_squared, force_profile) -> float:
    """
    ε = ∫ χ²(r) F(r) / (F(r) + 1) dr on a grid (forces in F₀ units).

    Raises NotNormalized when the density does not integrate to one within
    1e-8 by the same trapezoid rule.
    """
    r = np.asarray(r, dtype=float)
    chi_squared = np.asarray(chi_squared, dtype=float)
    if np.any(chi_squared < 0.0):
        raise NotNormalized("density has negative values")
    norm = trapezoid(chi_squared, r)
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"density integrates to {norm:.12f}, expected 1")
    force = np.broadcast_to(np.asarray(force_profile(r), dtype=float), r.shape)
    if np.any(force < 0.0):
        raise ValueError("force magnitude must be non-negative")
    return float(trapezoid(chi_squared * epsilon_operator(force), r))
