import math

import numpy as np
import pytest

from coulomb_model import Coupling, QuantumNumbers, bound_state_exists, solve_eta
from errors import GridTooSmall, IterationDiverged, NoBoundState
from radial_oracle import (
    MIN_GRID_POINTS,
    PotentialSpec,
    RadialGrid,
    _aitken_jump,
    _numerov_run,
    coulomb_potential,
    default_grid,
    self_consistent_solve,
    shoot_eigenvalue,
    solve_coulomb_oracle,
)
from spectrum import energy_model

S1, S2, P2 = QuantumNumbers(1, 0), QuantumNumbers(2, 0), QuantumNumbers(2, 1)
S3 = QuantumNumbers(3, 0)


def _box(depth: float = -1.0) -> PotentialSpec:
    return PotentialSpec(
        potential=lambda r: np.full_like(r, depth),
        force_magnitude=lambda r: np.zeros_like(r),
        hard_wall=True,
        name="box",
    )


# ----------------------------------------------------------------------------------
# Grids
# ----------------------------------------------------------------------------------

@pytest.mark.parametrize("r_min, r_max, count", [
    (0.0, 10.0, 2000),
    (5.0, 1.0, 2000),
    (1e-6, 10.0, MIN_GRID_POINTS - 1),
    (1e-6, 10.0, 1500.5),
])
def test_invalid_grids(r_min, r_max, count):
    with pytest.raises(ValueError):
        RadialGrid(r_min, r_max, count)


def test_default_grid_extent_and_spacing():
    grid = default_grid(S1, Coupling(0.5), 0.7)
    length = 0.49 / 0.5
    assert grid.r_min == 1e-6
    assert grid.r_max == pytest.approx(49.0)
    assert grid.spacing <= length / 200.0
    assert grid.points()[-1] == pytest.approx(grid.r_max)


@pytest.mark.parametrize("alphaZ", [1e-3, 0.3, 50.0])
def test_default_grid_resolution_does_not_depend_on_coupling(alphaZ):
    grid = default_grid(S2, Coupling(alphaZ), 1.0)
    assert grid.point_count >= MIN_GRID_POINTS
    assert grid.spacing * alphaZ / 2.0 == pytest.approx(1.0 / 200.0, rel=1e-3)


# ----------------------------------------------------------------------------------
# Shooting
# ----------------------------------------------------------------------------------

def test_hydrogen_like_ground_level():
    c = Coupling(0.2)
    state = shoot_eigenvalue(S1, coulomb_potential(c), 1.0, default_grid(S1, c, 1.0))
    assert state.eigenvalue == pytest.approx(-0.02, rel=1e-8)
    assert state.node_count == 0
    assert state.norm() == pytest.approx(1.0, abs=1e-9)


def test_eta_rescales_the_level():
    c, eta = Coupling(0.2), 0.8
    state = shoot_eigenvalue(S1, coulomb_potential(c), eta, default_grid(S1, c, eta))
    assert state.eigenvalue == pytest.approx(-0.02 / eta ** 2, rel=1e-8)


def test_level_at_the_self_consistent_eta():
    c = Coupling(0.4)
    solution = solve_eta(S1, c)
    state = shoot_eigenvalue(S1, coulomb_potential(c), solution.eta, default_grid(S1, c, solution.eta))
    assert state.eigenvalue == pytest.approx(energy_model(S1, c, solution.epsilon), rel=1e-8)


def test_excited_state_node_count():
    c, qn = Coupling(0.3), QuantumNumbers(3, 1)
    state = shoot_eigenvalue(qn, coulomb_potential(c), 1.0, default_grid(qn, c, 1.0))
    assert state.node_count == 1
    assert state.eigenvalue == pytest.approx(-0.09 / 18.0, rel=1e-6)
    assert state.norm() == pytest.approx(1.0, abs=1e-9)


def test_shape_near_origin_and_at_r_max():
    c = Coupling(0.2)
    state = shoot_eigenvalue(S1, coulomb_potential(c), 1.0, default_grid(S1, c, 1.0))
    k = c.alphaZ
    r, chi = state.r, state.chi
    sign = math.copysign(1.0, chi[np.argmax(np.abs(chi))])
    ratio = sign * chi[:10] / r[:10]
    assert ratio == pytest.approx(2.0 * k ** 1.5 * np.exp(-k * r[:10]), rel=0.01)
    assert abs(chi[-1]) < 1e-10 * np.max(np.abs(chi))


def test_overflowing_recurrence_is_renormalised():
    # y_{i+1} = 5 y_i - y_{i-1}: growth of about 4.8 per step overflows long before the end
    u = np.full(20_000, 0.8)
    y = _numerov_run(u, 0.0, 1.0)
    assert np.all(np.isfinite(y))
    assert np.max(np.abs(y)) == pytest.approx(1.0)
    assert np.all(np.diff(y) >= 0.0)
    pieces = _numerov_run(u, 0.0, 1.0, piecewise=True)
    assert np.all(pieces[1:] > 0.0)


def test_warm_start_gives_same_level():
    c = Coupling(0.25)
    pot, grid = coulomb_potential(c), default_grid(S2, c, 1.0)
    cold = shoot_eigenvalue(S2, pot, 1.0, grid)
    warm = shoot_eigenvalue(S2, pot, 1.0, grid, energy_guess=cold.eigenvalue * 1.01)
    far = shoot_eigenvalue(S2, pot, 1.0, grid, energy_guess=-10.0)
    assert warm.eigenvalue == pytest.approx(cold.eigenvalue, rel=1e-12)
    assert far.eigenvalue == pytest.approx(cold.eigenvalue, rel=1e-12)


def test_state_must_fit_on_grid():
    c = Coupling(0.2)
    with pytest.raises(GridTooSmall):
        shoot_eigenvalue(S1, coulomb_potential(c), 1.0, RadialGrid(1e-6, 15.0, 2000))


def test_shoot_rejects_bad_eta():
    c = Coupling(0.2)
    with pytest.raises(ValueError):
        shoot_eigenvalue(S1, coulomb_potential(c), 0.0, default_grid(S1, c, 1.0))


def test_hard_wall_box_level():
    width = 10.0
    grid = RadialGrid(1e-6, width, 2001)
    state = shoot_eigenvalue(S1, _box(), 1.0, grid)
    assert state.eigenvalue == pytest.approx(-1.0 + math.pi ** 2 / (2.0 * width ** 2), abs=1e-7)
    assert state.node_count == 0


def test_hard_wall_box_excited_level():
    width = 10.0
    state = shoot_eigenvalue(QuantumNumbers(3, 0), _box(), 1.0, RadialGrid(1e-6, width, 4001))
    assert state.eigenvalue == pytest.approx(-1.0 + 9.0 * math.pi ** 2 / (2.0 * width ** 2), abs=1e-6)
    assert state.node_count == 2


# ----------------------------------------------------------------------------------
# Self-consistency
# ----------------------------------------------------------------------------------

def test_forceless_potential_converges_at_once():
    result = self_consistent_solve(S1, _box(), RadialGrid(1e-6, 10.0, 2001))
    assert result.epsilon == 0.0
    assert result.iterations == 1


def test_iterates_move_monotonically():
    c = Coupling(0.3)
    result = self_consistent_solve(S1, coulomb_potential(c), default_grid(S1, c, 1.0))
    steps = np.diff(result.epsilon_history)
    assert np.all(steps >= -1e-9)
    assert result.epsilon_history[0] == 0.0
    assert result.epsilon == result.epsilon_history[-1]


def test_iteration_budget_is_enforced():
    c = Coupling(0.3)
    with pytest.raises(IterationDiverged):
        self_consistent_solve(S1, coulomb_potential(c), default_grid(S1, c, 1.0), max_iterations=3)


def test_extrapolation_agrees_with_plain_damping():
    c = Coupling(0.3)
    pot, grid = coulomb_potential(c), default_grid(S1, c, 1.0)
    plain = self_consistent_solve(S1, pot, grid, accelerate=False)
    fast = self_consistent_solve(S1, pot, grid)
    assert fast.epsilon == pytest.approx(plain.epsilon, abs=1e-9)
    assert fast.iterations < plain.iterations


def test_aitken_jump_on_a_geometric_run():
    # steps 0.05, 0.025 point at the limit 0.2
    assert _aitken_jump(0.1, 0.15, 0.175, 1e-10) == pytest.approx(0.9 * 0.025)
    assert _aitken_jump(0.3, 0.25, 0.225, 1e-10) == pytest.approx(-0.9 * 0.025)


@pytest.mark.parametrize("iterates", [
    (0.1, 0.15, 0.14),          # reversal
    (0.1, 0.15, 0.25),          # growing steps
    (0.1, 0.1 + 1e-9, 0.1 + 1.5e-9),   # already converged
])
def test_aitken_jump_declines(iterates):
    assert _aitken_jump(*iterates, 1e-10) == 0.0


def test_aitken_jump_keeps_eta_positive():
    assert _aitken_jump(0.8, 0.89, 0.97, 1e-10) == pytest.approx(0.015)


@pytest.mark.parametrize("kwargs", [{"damping": 0.0}, {"damping": 1.5}, {"initial_epsilon": 1.0}])
def test_scf_argument_checks(kwargs):
    c = Coupling(0.3)
    with pytest.raises(ValueError):
        self_consistent_solve(S1, coulomb_potential(c), default_grid(S1, c, 1.0), **kwargs)


@pytest.mark.slow
@pytest.mark.parametrize("qn", [S1, S2, P2, S3])
@pytest.mark.parametrize("alphaZ", [0.1, 0.2, 0.3, 0.4])
def test_oracle_matches_analytic_state(qn, alphaZ):
    c = Coupling(alphaZ)
    analytic = solve_eta(qn, c)
    numeric = solve_coulomb_oracle(qn, c)
    assert numeric.epsilon == pytest.approx(analytic.epsilon, abs=1e-7)
    assert numeric.eigenstate.eigenvalue == pytest.approx(energy_model(qn, c, analytic.epsilon), rel=1e-8)
    assert numeric.eigenstate.node_count == qn.nodes
    assert numeric.eigenstate.norm() == pytest.approx(1.0, abs=1e-9)


@pytest.mark.slow
def test_oracle_finds_nothing_above_critical_coupling():
    with pytest.raises((NoBoundState, IterationDiverged, GridTooSmall)):
        solve_coulomb_oracle(S1, Coupling(0.6))


def _oracle_finds_state(c: Coupling) -> bool:
    try:
        solve_coulomb_oracle(S1, c)
    except (NoBoundState, IterationDiverged, GridTooSmall):
        return False
    return True


@pytest.mark.slow
@pytest.mark.parametrize("alphaZ", np.round(np.arange(0.45, 0.5501, 0.01), 2).tolist())
def test_both_paths_agree_on_existence_near_critical_coupling(alphaZ):
    c = Coupling(alphaZ)
    assert _oracle_finds_state(c) == bound_state_exists(S1, c)
