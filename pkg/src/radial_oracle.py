"""
radial_oracle.py
Independent numerical path: Numerov shooting for the radial equation at
fixed η, and the damped self-consistent loop for any central potential.

    χ'' = [l(l+1)/r² + 2(V(r) - E)/η²] χ = w(r) χ

Numerov on a uniform grid, with u_i = 1 - h² w_i / 12:

    u_{i+1} χ_{i+1} = (12 - 10 u_i) χ_i - u_{i-1} χ_{i-1}

The recurrence is run from the origin outwards (χ ∝ r^{l+1}) and from r_max
inwards (χ(r_max) = 0); the two pieces are matched at the outer classical
turning point. Levels are bracketed by counting the nodes of the outward
solution and refined on the matching Wronskian.

Self-consistency
----------------
    ε ← ε + damping · (∫ χ² F/(F + 1) dr - ε),   χ solved at η = 1 - ε

    with an under-relaxed Aitken extrapolation after every second step.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import LinAlgError, solve_banded
from scipy.optimize import brentq

from coulomb_model import Coupling, QuantumNumbers, epsilon_from_density
from errors import (
    EigenvalueNotBracketed,
    GridTooSmall,
    IterationDiverged,
    NoBoundState,
    NonConvergence,
)

logger = logging.getLogger(__name__)

MIN_GRID_POINTS = 1000
DEFAULT_R_MIN = 1e-6
POINTS_PER_LENGTH = 200        # grid points per length scale n η² / αZ
EXTENT_FACTOR = 50.0           # r_max = 50 n² η² / αZ

TAIL_FRACTION = 0.02           # outer share of the grid checked for decay
TAIL_THRESHOLD = 1e-6          # allowed |χ| there, relative to max |χ|
WARM_WINDOW = 0.05             # relative energy window around a guess
MAX_BISECTIONS = 200
NUMEROV_BLOCK = 128            # growth per step is at most ~14 above the energy floor
ENERGY_RTOL = 1e-14

DEFAULT_DAMPING = 0.5
DEFAULT_SCF_TOL = 1e-10
DEFAULT_MAX_ITERATIONS = 200
DEFAULT_ETA_FLOOR = 0.1
AITKEN_RELAXATION = 0.9

Profile = Callable[[np.ndarray], np.ndarray]


# ----------------------------------------------------------------------------------
# Domain types
# ----------------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid r_min, r_min + h, ..., r_max."""

    r_min: float
    r_max: float
    point_count: int

    def __post_init__(self):
        if not 0.0 < self.r_min < self.r_max:
            raise ValueError(f"need 0 < r_min < r_max, got [{self.r_min}, {self.r_max}]")
        if int(self.point_count) != self.point_count or self.point_count < MIN_GRID_POINTS:
            raise ValueError(
                f"point_count must be an integer >= {MIN_GRID_POINTS}, got {self.point_count}"
            )

    @property
    def spacing(self) -> float:
        return (self.r_max - self.r_min) / (self.point_count - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, int(self.point_count))


@dataclass(frozen=True)
class PotentialSpec:
    """
    Central potential V(r) (μc² units) and its force magnitude |dV/dr|
    (F₀ units), both vectorised over r.

    hard_wall marks problems meant to live in the box [r_min, r_max]: the
    decay check at r_max is skipped and the energy window is not capped by
    V(r_max).
    """

    potential: Profile
    force_magnitude: Profile
    hard_wall: bool = False
    name: str = "custom"


@dataclass(frozen=True, eq=False)
class NumericEigenstate:
    """Normalised numerical radial function on a grid."""

    grid: RadialGrid
    chi: np.ndarray
    eigenvalue: float
    node_count: int
    qn: QuantumNumbers

    @property
    def r(self) -> np.ndarray:
        return self.grid.points()

    def norm(self) -> float:
        return float(np.sum(self.chi * self.chi) * self.grid.spacing)


@dataclass(frozen=True, eq=False)
class SelfConsistentResult:
    epsilon: float
    eigenstate: NumericEigenstate
    iterations: int
    epsilon_history: tuple[float, ...] = field(default=())


def _coulomb_energy(r, alphaZ):
    return -alphaZ / r


def _coulomb_force(r, alphaZ):
    return alphaZ / (r * r)


def coulomb_potential(c: Coupling) -> PotentialSpec:
    """V = -αZ/r, |F| = αZ/r² (picklable, so it can cross process boundaries)."""
    return PotentialSpec(
        potential=partial(_coulomb_energy, alphaZ=c.alphaZ),
        force_magnitude=partial(_coulomb_force, alphaZ=c.alphaZ),
        name=f"coulomb(alphaZ={c.alphaZ:g})",
    )


# ----------------------------------------------------------------------------------
# Numerov machinery
# ----------------------------------------------------------------------------------

def _numerov_solve(u: np.ndarray, y0: float, y1: float) -> np.ndarray:
    """
    Numerov recurrence from two starting values.

    Written as the lower-triangular banded system
        y_0 = y0, y_1 = y1,
        u_{i-1} y_{i-1} - (12 - 10 u_i) y_i + u_{i+1} y_{i+1} = 0
    and handed to LAPACK. An overflowing recurrence either comes back with
    non-finite values or makes the factorisation report a singular matrix.
    """
    n = u.size
    ab = np.zeros((3, n))
    ab[0, :2] = 1.0
    ab[0, 2:] = u[2:]
    ab[1, 1:n - 1] = -(12.0 - 10.0 * u[1:n - 1])
    ab[2, :n - 2] = u[:n - 2]
    rhs = np.zeros(n)
    rhs[0], rhs[1] = y0, y1
    with np.errstate(over="ignore", invalid="ignore"):
        return solve_banded((2, 0), ab, rhs, check_finite=False)


def _numerov_blocks(u: np.ndarray, y0: float, y1: float) -> tuple[np.ndarray, np.ndarray]:
    """
    The same recurrence in blocks of NUMEROV_BLOCK points, each rescaled to
    max |y| = 1. Returns the rescaled values and, per point, the log of the
    factor they were divided by.
    """
    n = u.size
    y = np.empty(n)
    logs = np.zeros(n)
    y[0], y[1] = y0, y1
    start, level = 0, 0.0
    while start + 2 < n:
        stop = min(start + NUMEROV_BLOCK, n)
        try:
            seg = _numerov_solve(u[start:stop], y[start], y[start + 1])
        except LinAlgError as exc:
            raise NonConvergence(f"Numerov recurrence broke down inside a block: {exc}") from exc
        scale = float(np.max(np.abs(seg)))
        if not (math.isfinite(scale) and scale > 0.0):
            raise NonConvergence("Numerov recurrence broke down inside a block")
        y[start:stop] = seg / scale
        level += math.log(scale)
        logs[start:stop] = level
        start = stop - 2
    return y, logs


def _numerov_run(u: np.ndarray, y0: float, y1: float, piecewise: bool = False) -> np.ndarray:
    """
    Numerov solution, falling back to renormalised blocks when it overflows.

    With piecewise=True each block keeps its own positive scale (enough for
    counting sign changes); otherwise the blocks are brought back to one
    common scale and whatever underflows becomes zero.
    """
    try:
        y = _numerov_solve(u, y0, y1)
        if np.all(np.isfinite(y)):
            return y
    except LinAlgError:
        logger.debug("Numerov solve over %d points overflowed; renormalising in blocks", u.size)
    y, logs = _numerov_blocks(u, y0, y1)
    if piecewise:
        return y
    return y * np.exp(logs - logs.max())


def _sign_changes(y: np.ndarray) -> int:
    s = np.sign(y)
    s = s[s != 0.0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


class _NumerovShooter:
    """Shooting problem for one state, one η, one potential on one grid."""

    def __init__(self, qn: QuantumNumbers, pot: PotentialSpec, eta: float, grid: RadialGrid):
        self.qn = qn
        self.eta = eta
        self.hard_wall = pot.hard_wall
        self.r = grid.points()
        self.h = grid.spacing
        self.size = self.r.size

        potential = np.asarray(pot.potential(self.r), dtype=float)
        self.potential = np.broadcast_to(potential, self.r.shape).copy()
        if not np.all(np.isfinite(self.potential)):
            raise ValueError(f"potential {pot.name} is not finite on the grid")
        l = qn.l
        self.centrifugal = l * (l + 1) / (self.r * self.r)

        # the centrifugal part of h²w/12 stays below 1/4 from here on
        self.start = int(np.searchsorted(self.r, self.h * math.sqrt(l * (l + 1) / 3.0)))
        if self.start > self.size - 8:
            raise GridTooSmall("grid too coarse to resolve the centrifugal barrier")
        # Frobenius slope of χ / r^{l+1}, from the 1/r part of V at the origin
        self.slope = self.r[0] * self.potential[0] / (eta * eta * (l + 1))
        # the potential part of h²w/12 stays below 1/4 for E above this
        self.energy_floor = float(np.max(self.potential)) - 1.5 * eta * eta / (self.h * self.h)

    def weights(self, energy: float) -> np.ndarray:
        w = self.centrifugal + 2.0 * (self.potential - energy) / (self.eta * self.eta)
        return 1.0 - self.h * self.h * w / 12.0

    # -- solutions -----------------------------------------------------------------

    def outward(self, u: np.ndarray, stop: int | None = None, piecewise: bool = False) -> np.ndarray:
        stop = self.size if stop is None else stop
        s = self.start
        head = self.r[:s + 2]
        y = np.empty(stop)
        y[:s + 2] = head ** (self.qn.l + 1) * (1.0 + self.slope * head)
        y[s:] = _numerov_run(u[s:stop], y[s], y[s + 1], piecewise)
        return y

    def inward(self, u: np.ndarray, m: int) -> np.ndarray:
        """Solution with χ(r_max) = 0 on indices m-1 .. N-1."""
        return _numerov_run(u[m - 1:][::-1], 0.0, 1.0)[::-1]

    def count_nodes(self, energy: float) -> int:
        """Sign changes of the outward solution: levels of the box below energy."""
        return _sign_changes(self.outward(self.weights(energy), piecewise=True)[self.start:])

    def turning_index(self, energy: float) -> int:
        w = self.centrifugal + 2.0 * (self.potential - energy) / (self.eta * self.eta)
        allowed = np.flatnonzero(w[self.start:] < 0.0) + self.start
        if allowed.size == 0:
            m = (self.start + self.size) // 2
        else:
            m = int(allowed[-1])
            if m >= self.size - 3 and not self.hard_wall:
                raise GridTooSmall(
                    f"classically allowed region reaches r_max={self.r[-1]:.6g} at E={energy:.6g}"
                )
        return int(np.clip(m, self.start + 2, self.size - 3))

    def wronskian(self, energy: float, m: int) -> float:
        u = self.weights(energy)
        out = self.outward(u, stop=m + 2)
        inn = self.inward(u, m)
        o = out[m - 1:m + 2] / np.max(np.abs(out))
        i = inn[:3] / np.max(np.abs(inn))
        return float(o[1] * (i[2] - i[0]) - i[1] * (o[2] - o[0]))

    # -- eigenvalue search ---------------------------------------------------------

    def _energy_top(self) -> float:
        if not self.hard_wall:
            return float(self.potential[-1])
        width = self.r[-1] - self.r[0]
        k = self.qn.nodes + self.qn.l + 2
        top = float(np.max(self.potential)) + 0.5 * (self.eta * k * math.pi / width) ** 2
        spread = top - self.energy_floor
        for _ in range(60):
            if self.count_nodes(top) > self.qn.nodes:
                break
            spread *= 2.0
            top = self.energy_floor + spread
        return top

    def bracket(self, energy_guess: float | None = None) -> tuple[float, float]:
        """[lo, hi] holding exactly the box level with n - l - 1 nodes."""
        k = self.qn.nodes
        if energy_guess is not None and math.isfinite(energy_guess):
            width = WARM_WINDOW * max(abs(energy_guess), 1e-12)
            lo, hi = max(energy_guess - width, self.energy_floor), energy_guess + width
            if not self.hard_wall:
                hi = min(hi, float(self.potential[-1]))
            if lo < hi and self.count_nodes(lo) == k and self.count_nodes(hi) == k + 1:
                return lo, hi
            logger.debug("energy guess %.12g does not bracket %s; full search", energy_guess, self.qn)

        lo, hi = self.energy_floor, self._energy_top()
        c_lo, c_hi = self.count_nodes(lo), self.count_nodes(hi)
        if c_lo > k:
            raise EigenvalueNotBracketed(
                f"{c_lo} levels lie below the energy floor {lo:.6g}; grid too coarse"
            )
        if c_hi <= k:
            raise EigenvalueNotBracketed(
                f"no {self.qn} level below E={hi:.6g} (only {c_hi} bound levels)"
            )
        for _ in range(MAX_BISECTIONS):
            if c_lo == k and c_hi == k + 1:
                return lo, hi
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            c = self.count_nodes(mid)
            if c <= k:
                lo, c_lo = mid, c
            else:
                hi, c_hi = mid, c
        raise EigenvalueNotBracketed(f"could not isolate the {self.qn} level in [{lo}, {hi}]")

    def refine(self, lo: float, hi: float) -> tuple[float, int]:
        m = self.turning_index(0.5 * (lo + hi))
        f_lo, f_hi = self.wronskian(lo, m), self.wronskian(hi, m)
        if f_lo == 0.0:
            return lo, m
        if f_hi == 0.0:
            return hi, m
        if f_lo * f_hi > 0.0:
            raise EigenvalueNotBracketed(f"matching Wronskian keeps its sign on [{lo}, {hi}]")
        energy = brentq(
            self.wronskian, lo, hi, args=(m,),
            xtol=ENERGY_RTOL * max(abs(lo), abs(hi), 1e-300),
            rtol=4.0 * np.finfo(float).eps,
            maxiter=200,
        )
        return float(energy), m

    def assemble(self, energy: float, m: int, grid: RadialGrid) -> NumericEigenstate:
        u = self.weights(energy)
        out = self.outward(u, stop=m + 1)
        inn = self.inward(u, m)
        chi = np.empty(self.size)
        chi[:m + 1] = out
        chi[m:] = inn[1:] * (out[m] / inn[1])
        chi /= math.sqrt(trapezoid(chi * chi, self.r))

        peak = float(np.max(np.abs(chi)))
        if not self.hard_wall:
            tail_start = int(self.size * (1.0 - TAIL_FRACTION))
            if np.max(np.abs(chi[tail_start:])) > TAIL_THRESHOLD * peak:
                raise GridTooSmall(
                    f"{self.qn} state has not decayed by r_max={self.r[-1]:.6g}"
                )
        nodes = _sign_changes(np.where(np.abs(chi) > 1e-10 * peak, chi, 0.0))
        if nodes != self.qn.nodes:
            raise EigenvalueNotBracketed(
                f"level at E={energy:.12g} has {nodes} nodes, expected {self.qn.nodes}"
            )
        return NumericEigenstate(grid, chi, energy, nodes, self.qn)


# ----------------------------------------------------------------------------------
# Public solvers
# ----------------------------------------------------------------------------------

def shoot_eigenvalue(qn: QuantumNumbers, pot: PotentialSpec, eta: float, grid: RadialGrid,
                     energy_guess: float | None = None) -> NumericEigenstate:
    """
    Level of the radial equation with n - l - 1 nodes at fixed η.

    energy_guess narrows the first bracket (warm start inside iterations).
    Raises EigenvalueNotBracketed when no such level exists in the energy
    window, GridTooSmall when the state does not fit on the grid.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta!r}")
    shooter = _NumerovShooter(qn, pot, eta, grid)
    lo, hi = shooter.bracket(energy_guess)
    energy, m = shooter.refine(lo, hi)
    return shooter.assemble(energy, m, grid)


def _aitken_jump(e0: float, e1: float, e2: float, tol: float) -> float:
    """
    Extra move toward the limit of three damped iterates, or 0.0.

    Only geometric runs (steps of one sign shrinking by a ratio in (0, 1))
    are extrapolated. The move is AITKEN_RELAXATION of the Aitken estimate
    and never takes more than half of the remaining room in [0, 1).
    """
    s1, s2 = e1 - e0, e2 - e1
    if abs(s2) <= 10.0 * tol or s1 * s2 <= 0.0:
        return 0.0
    ratio = s2 / s1
    if not 0.0 < ratio < 1.0:
        return 0.0
    jump = AITKEN_RELAXATION * s2 * ratio / (1.0 - ratio)
    if jump > 0.0:
        return min(jump, 0.5 * (1.0 - e2))
    return max(jump, -0.5 * e2)


def self_consistent_solve(qn: QuantumNumbers, pot: PotentialSpec, grid: RadialGrid,
                          initial_epsilon: float = 0.0,
                          damping: float = DEFAULT_DAMPING,
                          tol: float = DEFAULT_SCF_TOL,
                          max_iterations: int = DEFAULT_MAX_ITERATIONS,
                          eta_floor: float = DEFAULT_ETA_FLOOR,
                          accelerate: bool = True) -> SelfConsistentResult:
    """
    Damped fixed point of ε = ∫ χ²_η F/(F + 1) dr.

    The iterates must move in one direction after the first step; a reversal
    larger than 10·tol raises IterationDiverged, as does leaving [0, 1) or
    running out of iterations. When η falls below eta_floor the state is
    taken to have collapsed and NoBoundState is raised.

    With accelerate=True every second damped step is followed by an Aitken
    extrapolation of the last three iterates. Close to the critical coupling
    the damped map contracts by a factor near one per step and would not
    reach tol within the iteration budget on its own. Extrapolated points
    are recorded in epsilon_history but do not count as iterations.
    """
    if not 0.0 <= initial_epsilon < 1.0:
        raise ValueError(f"initial_epsilon must lie in [0, 1), got {initial_epsilon!r}")
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping!r}")

    r = grid.points()
    epsilon = initial_epsilon
    history = [epsilon]
    direction = 0.0
    guess = None
    step = 0.0
    damped = 0        # damped steps since the last extrapolation

    for iteration in range(1, max_iterations + 1):
        eta = 1.0 - epsilon
        if eta < eta_floor:
            raise NoBoundState(
                f"{qn} in {pot.name}: eta fell to {eta:.6f} after {iteration - 1} iterations"
            )
        state = shoot_eigenvalue(qn, pot, eta, grid, energy_guess=guess)
        guess = state.eigenvalue
        target = epsilon_from_density(r, state.chi * state.chi, pot.force_magnitude)
        step = damping * (target - epsilon)
        epsilon += step
        history.append(epsilon)
        logger.debug("%s iteration %d: eps=%.15e E=%.15e", qn, iteration, epsilon, state.eigenvalue)

        if not 0.0 <= epsilon < 1.0:
            raise IterationDiverged(f"epsilon left [0, 1): {epsilon!r}")
        if abs(step) < tol:
            return SelfConsistentResult(epsilon, state, iteration, tuple(history))
        if direction == 0.0:
            direction = math.copysign(1.0, step)
        elif step * direction < 0.0 and abs(step) > 10.0 * tol:
            raise IterationDiverged(
                f"epsilon iterates reversed at iteration {iteration} (step {step:.3e})"
            )

        damped += 1
        if accelerate and damped >= 2:
            jump = _aitken_jump(history[-3], history[-2], history[-1], tol)
            if jump != 0.0:
                epsilon += jump
                history.append(epsilon)
                logger.debug("%s extrapolated by %.3e to eps=%.15e", qn, jump, epsilon)
            damped = 0

    raise IterationDiverged(
        f"no convergence in {max_iterations} iterations (last step {step:.3e})"
    )


def default_grid(qn: QuantumNumbers, c: Coupling, eta: float) -> RadialGrid:
    """r_min = 1e-6, r_max = 50 n² η² / αZ, spacing at most (n η² / αZ) / 200."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta!r}")
    length = qn.n * eta * eta / c.alphaZ
    r_max = EXTENT_FACTOR * qn.n * length
    count = math.ceil((r_max - DEFAULT_R_MIN) * POINTS_PER_LENGTH / length) + 1
    return RadialGrid(DEFAULT_R_MIN, r_max, max(MIN_GRID_POINTS, count))


def solve_coulomb_oracle(qn: QuantumNumbers, c: Coupling,
                         tol: float = DEFAULT_SCF_TOL) -> SelfConsistentResult:
    """
    Self-consistent Coulomb state in two passes: on the η = 1 grid, then
    again on a grid built for the converged η, starting from the first
    answer.
    """
    pot = coulomb_potential(c)
    first = self_consistent_solve(qn, pot, default_grid(qn, c, 1.0), tol=tol)
    grid = default_grid(qn, c, 1.0 - first.epsilon)
    second = self_consistent_solve(qn, pot, grid, initial_epsilon=first.epsilon, tol=tol)
    logger.debug("%s oracle at alphaZ=%.9g: eps=%.12e after %d + %d iterations",
                 qn, c.alphaZ, second.epsilon, first.iterations, second.iterations)
    return SelfConsistentResult(
        epsilon=second.epsilon,
        eigenstate=second.eigenstate,
        iterations=first.iterations + second.iterations,
        epsilon_history=first.epsilon_history + second.epsilon_history[1:],
    )
