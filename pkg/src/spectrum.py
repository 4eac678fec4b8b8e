"""
spectrum.py
Per-state physical outputs and comparisons with the standard theories.

    E_model = -(αZ)² / (2n²) · 1/(1-ε)²                 (this model)
    E_S     = -(αZ)² / (2n²)                            (Schrödinger, ε = 0)
    E_KG    = -1 + [1 + (αZ)² (n - l - ½ + √((l+½)² - (αZ)²))^-2]^-½
                                                        (Klein-Gordon, spinless)

All energies in μc². Also holds the quantum Poisson brackets and the
angular-momentum coefficients, which only depend on the masses and ε.
"""

import logging
import math
from dataclasses import asdict, dataclass

from coulomb_model import (
    Coupling,
    EtaSolution,
    QuantumNumbers,
    RadialState,
    radial_chi,
    solve_eta,
)
from errors import BeyondCriticalCoupling, DegenerateEpsilon, NoBoundState
from numerics import DEFAULT_QUADRATURE, DEFAULT_ROOT_TOL, QuadratureSpec, integrate_semi_infinite

logger = logging.getLogger(__name__)

DEFAULT_CANDIDATES = (QuantumNumbers(1, 0), QuantumNumbers(2, 0), QuantumNumbers(2, 1))


@dataclass(frozen=True)
class LevelResult:
    """
    Everything reported for one (n, l) state at one coupling.

    energy_klein_gordon is None above the Klein-Gordon critical coupling.
    """

    qn: QuantumNumbers
    coupling: Coupling
    epsilon: float
    energy_model: float
    energy_schrodinger: float
    energy_klein_gordon: float | None
    mean_radius: float
    solution: EtaSolution

    def as_dict(self) -> dict:
        return {
            "n": self.qn.n,
            "l": self.qn.l,
            "alphaZ": self.coupling.alphaZ,
            "epsilon": self.epsilon,
            "eta": self.solution.eta,
            "energy_model": self.energy_model,
            "energy_schrodinger": self.energy_schrodinger,
            "energy_klein_gordon": self.energy_klein_gordon,
            "mean_radius": self.mean_radius,
            "root_count": self.solution.root_count,
            "residual": self.solution.residual,
            "branch": self.solution.branch.value,
        }


@dataclass(frozen=True)
class MassPair:
    """Masses of the two particles in any consistent unit."""

    m1: float
    m2: float

    def __post_init__(self):
        if not (self.m1 > 0.0 and self.m2 > 0.0):
            raise ValueError(f"masses must be strictly positive, got ({self.m1}, {self.m2})")

    @property
    def total_mass(self) -> float:
        return self.m1 + self.m2

    @property
    def reduced_mass(self) -> float:
        return self.m1 * self.m2 / self.total_mass


@dataclass(frozen=True)
class CommutatorTable:
    """Quantum Poisson brackets (commutators divided by iħ)."""

    x1p1: float
    x2p2: float
    x1p2: float
    x2p1: float
    x1x2: float = 0.0
    p1p2: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AngularCoefficients:
    """C_kn expressing the particle angular momenta through the relative one."""

    c11: float
    c12: float
    c21: float
    c22: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SplittingReport:
    """Sublevels of one shell n; a missing sublevel has energy None."""

    n: int
    coupling: Coupling
    energies: dict[int, float | None]
    energy_schrodinger: float

    @property
    def spread(self) -> float | None:
        present = [e for e in self.energies.values() if e is not None]
        if len(present) < 2:
            return None
        return max(present) - min(present)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "alphaZ": self.coupling.alphaZ,
            "energy_schrodinger": self.energy_schrodinger,
            "sublevels": [{"l": l, "energy_model": e} for l, e in sorted(self.energies.items())],
            "spread": self.spread,
        }


# ----------------------------------------------------------------------------------
# Energies
# ----------------------------------------------------------------------------------

def energy_model(qn: QuantumNumbers, c: Coupling, epsilon: float) -> float:
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    eta = 1.0 - epsilon
    return -(c.alphaZ ** 2) / (2.0 * qn.n ** 2) / (eta * eta)


def energy_schrodinger(qn: QuantumNumbers, c: Coupling) -> float:
    return energy_model(qn, c, 0.0)


def klein_gordon_critical(l: int) -> float:
    """Above αZ = l + 1/2 the Klein-Gordon level falls to the centre."""
    return l + 0.5


def energy_klein_gordon(qn: QuantumNumbers, c: Coupling) -> float:
    """
    Spinless Klein-Gordon level in the Coulomb field.

    Raises BeyondCriticalCoupling for αZ > l + 1/2 (the level still exists
    at equality, where the square root vanishes).
    """
    za = c.alphaZ
    half = qn.l + 0.5
    if za > klein_gordon_critical(qn.l):
        raise BeyondCriticalCoupling(
            f"Klein-Gordon {qn} level does not exist for alphaZ={za} > {half}"
        )
    root = math.sqrt(max(half * half - za * za, 0.0))
    t = za * za / (qn.n - qn.l - 0.5 + root) ** 2
    # (1 + t)^(-1/2) - 1 without cancellation
    return math.expm1(-0.5 * math.log1p(t))


# ----------------------------------------------------------------------------------
# Radii
# ----------------------------------------------------------------------------------

def mean_radius(qn: QuantumNumbers, c: Coupling, eta: float,
                quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """⟨r⟩ = ∫ r χ²(r) dr by quadrature over the analytic density."""
    state = RadialState.build(qn, c, eta)
    return integrate_semi_infinite(
        lambda r: r * radial_chi(state, r) ** 2, quad, scale=0.5 * state.length_scale
    )


def mean_radius_analytic(qn: QuantumNumbers, c: Coupling, eta: float) -> float:
    """⟨r⟩ = [3n² - l(l+1)] η² / (2αZ)."""
    return (3 * qn.n ** 2 - qn.l * (qn.l + 1)) * eta * eta / (2.0 * c.alphaZ)


# ----------------------------------------------------------------------------------
# Levels
# ----------------------------------------------------------------------------------

def solve_level(qn: QuantumNumbers, c: Coupling,
                quad: QuadratureSpec = DEFAULT_QUADRATURE,
                tol: float = DEFAULT_ROOT_TOL) -> LevelResult:
    """Solve for ε and fill in every reported quantity; NoBoundState propagates."""
    solution = solve_eta(qn, c, quad, tol)
    try:
        e_kg = energy_klein_gordon(qn, c)
    except BeyondCriticalCoupling:
        e_kg = None
    return LevelResult(
        qn=qn,
        coupling=c,
        epsilon=solution.epsilon,
        energy_model=energy_model(qn, c, solution.epsilon),
        energy_schrodinger=energy_schrodinger(qn, c),
        energy_klein_gordon=e_kg,
        mean_radius=mean_radius(qn, c, solution.eta, quad),
        solution=solution,
    )


def ground_state(c: Coupling,
                 candidates=DEFAULT_CANDIDATES,
                 quad: QuadratureSpec = DEFAULT_QUADRATURE,
                 tol: float = DEFAULT_ROOT_TOL) -> QuantumNumbers | None:
    """Lowest model level among the candidates that exist; None if none does."""
    candidates = tuple(candidates)
    if not candidates:
        raise ValueError("ground_state needs at least one candidate state")
    best, best_energy = None, math.inf
    for qn in candidates:
        try:
            solution = solve_eta(qn, c, quad, tol)
        except NoBoundState:
            logger.debug("%s has no bound state at alphaZ=%.6g", qn, c.alphaZ)
            continue
        energy = energy_model(qn, c, solution.epsilon)
        if energy < best_energy:
            best, best_energy = qn, energy
    return best


def level_splitting(n: int, c: Coupling,
                    quad: QuadratureSpec = DEFAULT_QUADRATURE,
                    tol: float = DEFAULT_ROOT_TOL) -> SplittingReport:
    """Solve every sublevel l = 0..n-1 of shell n."""
    energies: dict[int, float | None] = {}
    for l in range(n):
        qn = QuantumNumbers(n, l)
        try:
            energies[l] = energy_model(qn, c, solve_eta(qn, c, quad, tol).epsilon)
        except NoBoundState:
            energies[l] = None
    return SplittingReport(n, c, energies, energy_schrodinger(QuantumNumbers(n, 0), c))


# ----------------------------------------------------------------------------------
# Brackets and coefficients
# ----------------------------------------------------------------------------------

def commutator_table(masses: MassPair, epsilon: float) -> CommutatorTable:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    w1 = masses.m1 / masses.total_mass
    w2 = masses.m2 / masses.total_mass
    return CommutatorTable(
        x1p1=1.0 - w2 * epsilon,
        x2p2=1.0 - w1 * epsilon,
        x1p2=w2 * epsilon,
        x2p1=w1 * epsilon,
    )


def angular_coefficients(masses: MassPair, epsilon: float) -> AngularCoefficients:
    if epsilon == 1.0:
        raise DegenerateEpsilon("angular coefficients diverge at epsilon = 1")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    w1 = masses.m1 / masses.total_mass
    w2 = masses.m2 / masses.total_mass
    eta = 1.0 - epsilon
    return AngularCoefficients(
        c11=(1.0 - w1 * epsilon) / eta,
        c12=-w1 * epsilon / eta,
        c21=-w2 * epsilon / eta,
        c22=(1.0 - w2 * epsilon) / eta,
    )
