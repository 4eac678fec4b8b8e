"""
sweep.py
Coupling sweeps: one row per αZ on a uniform grid.

Rows are pure functions of αZ, so they can be computed in any order and in
worker processes; SweepRunner always returns them in grid order.

Row kinds
---------
    level_row        : ε and the three energies of one state     (energy curves)
    epsilon_row      : ε of several states                       (ε curves)
    ground_state_row : lowest existing level among candidates    (ground-state map)
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from coulomb_model import Coupling, QuantumNumbers, solve_eta
from errors import BeyondCriticalCoupling, NoBoundState
from metrics import SweepMetrics
from numerics import QuadratureSpec
from spectrum import (
    energy_klein_gordon,
    energy_model,
    energy_schrodinger,
    ground_state,
)

logger = logging.getLogger(__name__)

LEVEL_COLUMNS = ("alphaZ", "epsilon", "energy_model", "energy_schrodinger", "energy_klein_gordon")
GROUND_STATE_COLUMNS = ("alphaZ", "ground_n", "ground_l")


@dataclass(frozen=True)
class SweepRow:
    """
    One computed row.

    Attributes:
        alphaZ    : grid point
        values    : cell values keyed by column name (None for empty cells)
        missing   : labels of the states without a bound state here
        residuals : |g(η) - η| of the levels solved for this row
    """

    alphaZ: float
    values: dict
    missing: tuple[str, ...] = ()
    residuals: tuple[float, ...] = field(default=())


def coupling_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    """steps uniform αZ values from lo to hi inclusive."""
    if not 0.0 < lo < hi:
        raise ValueError(f"sweep range needs 0 < min < max, got [{lo}, {hi}]")
    if int(steps) != steps or steps < 2:
        raise ValueError(f"sweep needs at least 2 steps, got {steps}")
    return np.linspace(lo, hi, int(steps))


def epsilon_columns(states: Sequence[QuantumNumbers]) -> tuple[str, ...]:
    return ("alphaZ",) + tuple(f"eps_{qn.label}" for qn in states)


# ----------------------------------------------------------------------------------
# Row functions (module level so worker processes can unpickle them)
# ----------------------------------------------------------------------------------

def level_row(alphaZ: float, qn: QuantumNumbers, quad: QuadratureSpec, tol: float) -> SweepRow:
    c = Coupling(float(alphaZ))
    values = {"alphaZ": c.alphaZ, "epsilon": None, "energy_model": None,
              "energy_schrodinger": energy_schrodinger(qn, c), "energy_klein_gordon": None}
    try:
        values["energy_klein_gordon"] = energy_klein_gordon(qn, c)
    except BeyondCriticalCoupling:
        pass
    try:
        solution = solve_eta(qn, c, quad, tol)
    except NoBoundState:
        return SweepRow(c.alphaZ, values, missing=(qn.label,))
    values["epsilon"] = solution.epsilon
    values["energy_model"] = energy_model(qn, c, solution.epsilon)
    return SweepRow(c.alphaZ, values, residuals=(solution.residual,))


def epsilon_row(alphaZ: float, states: tuple[QuantumNumbers, ...], quad: QuadratureSpec,
                tol: float) -> SweepRow:
    c = Coupling(float(alphaZ))
    values = {"alphaZ": c.alphaZ}
    missing, residuals = [], []
    for qn in states:
        try:
            solution = solve_eta(qn, c, quad, tol)
        except NoBoundState:
            values[f"eps_{qn.label}"] = None
            missing.append(qn.label)
            continue
        values[f"eps_{qn.label}"] = solution.epsilon
        residuals.append(solution.residual)
    return SweepRow(c.alphaZ, values, tuple(missing), tuple(residuals))


def ground_state_row(alphaZ: float, candidates: tuple[QuantumNumbers, ...],
                     quad: QuadratureSpec, tol: float) -> SweepRow:
    c = Coupling(float(alphaZ))
    found = ground_state(c, candidates, quad, tol)
    if found is None:
        return SweepRow(c.alphaZ, {"alphaZ": c.alphaZ, "ground_n": "none", "ground_l": "none"},
                        missing=("ground",))
    return SweepRow(c.alphaZ, {"alphaZ": c.alphaZ, "ground_n": found.n, "ground_l": found.l})


# ----------------------------------------------------------------------------------
# Runner
# ----------------------------------------------------------------------------------

class SweepRunner:
    """
    Evaluates a row function over a coupling grid.

    Parameters
    ----------
    name         : label used in logs and the report
    grid         : αZ values, ascending
    row_function : callable αZ -> SweepRow (picklable when threads > 1)
    threads      : worker processes; 1 runs in-process
    """

    def __init__(self, name: str, grid, row_function: Callable[[float], SweepRow], threads: int = 1):
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.name = name
        self.grid = [float(x) for x in grid]
        self.row_function = row_function
        self.threads = threads
        self.metrics = SweepMetrics(name)
        self.rows: list[SweepRow] = []

    def run(self) -> list[SweepRow]:
        logger.info("Starting sweep %s  points=%d, alphaZ=[%g, %g], threads=%d",
                    self.name, len(self.grid), self.grid[0], self.grid[-1], self.threads)

        if self.threads > 1 and len(self.grid) > 1:
            chunk = max(1, len(self.grid) // (4 * self.threads))
            with ProcessPoolExecutor(max_workers=self.threads) as pool:
                rows = list(pool.map(self.row_function, self.grid, chunksize=chunk))
        else:
            rows = [self.row_function(x) for x in self.grid]

        for row in rows:
            self.metrics.record_row(row.missing, row.residuals)
        self.rows = rows
        logger.info("Sweep %s complete: %d rows, %d with empty cells",
                    self.name, self.metrics.total_rows, self.metrics.missing_rows)
        return rows

    def table(self) -> list[dict]:
        return [row.values for row in self.rows]

    def summary(self) -> None:
        self.metrics.report()
