import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import simpson
from scipy.special import sici

from errors import InvalidBracket, NonConvergence
from numerics import (
    Bracket,
    QuadratureSpec,
    bisect_predicate_boundary,
    find_roots_on_interval,
    integrate_semi_infinite,
    integrate_semi_infinite_batch,
    minimize_on_scan,
)


# ----------------------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------------------

def test_exponential_integrates_to_one():
    assert integrate_semi_infinite(lambda x: math.exp(-x)) == pytest.approx(1.0, rel=1e-12)


def test_second_moment_is_two():
    assert integrate_semi_infinite(lambda x: x * x * math.exp(-x)) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("degree", range(13))
def test_polynomial_times_exponential_is_exact(degree):
    value = integrate_semi_infinite(lambda x: x ** degree * math.exp(-x))
    assert value == pytest.approx(math.factorial(degree), rel=1e-10)


def test_rational_integrand_matches_fine_simpson_grid():
    f = lambda x: x ** 4 * np.exp(-x) / (x * x + 0.5)
    x = np.linspace(0.0, 80.0, 1_000_001)
    oracle = simpson(f(x), x=x)
    assert integrate_semi_infinite(f) == pytest.approx(oracle, rel=1e-9)


def test_scale_moves_the_cut_point():
    # density of width 50: the head covers [0, 2000] instead of [0, 40]
    value = integrate_semi_infinite(lambda r: math.exp(-r / 50.0) / 50.0, scale=50.0)
    assert value == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("a", [1e-6, 1e-8, 1e-10])
def test_break_point_resolves_narrow_kink(a):
    # x² e^{-x} a/(x² + a) switches from x² to a e^{-x} around x = sqrt(a)
    b = math.sqrt(a)
    si, ci = sici(b)
    auxiliary = ci * math.sin(b) - (si - math.pi / 2.0) * math.cos(b)   # ∫ e^{-bt}/(t² + 1) dt
    exact = a * (1.0 - b * auxiliary)
    f = lambda x: x * x * math.exp(-x) * a / (x * x + a)
    assert integrate_semi_infinite(f, points=[b]) == pytest.approx(exact, rel=1e-10, abs=2e-14)


def test_break_points_outside_the_head_are_ignored():
    value = integrate_semi_infinite(lambda x: math.exp(-x), points=[0.0, -1.0, 1e6])
    assert value == pytest.approx(1.0, rel=1e-12)


def test_exhausted_budget_raises():
    spec = QuadratureSpec(max_subdivisions=1)
    with pytest.raises(NonConvergence):
        integrate_semi_infinite(lambda x: math.sin(20.0 * x) * x * x * math.exp(-x), spec)


def test_batch_matches_scalar_integrals():
    batch = integrate_semi_infinite_batch(
        lambda x: np.array([math.exp(-x), x * math.exp(-x), x ** 3 * math.exp(-x)])
    )
    assert batch == pytest.approx([1.0, 1.0, 6.0], rel=1e-11)


def test_quadrature_spec_rejects_bad_tolerances():
    with pytest.raises(ValueError):
        QuadratureSpec(relative_tolerance=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(cut_point=-1.0)


# ----------------------------------------------------------------------------------
# Roots
# ----------------------------------------------------------------------------------

def test_sine_roots_are_found_in_order():
    roots = find_roots_on_interval(math.sin, 0.5, 10.0)
    assert [r.root for r in roots] == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], abs=1e-12)
    for r in roots:
        assert r.bracket.lo <= r.root <= r.bracket.hi


def test_no_sign_change_gives_empty_list():
    assert find_roots_on_interval(lambda x: x * x + 1.0, -3.0, 3.0) == []


def test_batch_scan_gives_same_roots():
    scalar = find_roots_on_interval(math.cos, 0.0, 7.0)
    batch = find_roots_on_interval(math.cos, 0.0, 7.0, f_batch=np.cos)
    assert [r.root for r in batch] == pytest.approx([r.root for r in scalar], abs=1e-12)


@given(
    st.floats(min_value=-5.0, max_value=0.0),
    st.floats(min_value=0.5, max_value=5.0),
)
def test_roots_of_a_quadratic(a, gap):
    b = a + gap
    roots = find_roots_on_interval(lambda x: (x - a) * (x - b), a - 1.0, b + 1.0, scan_points=256)
    assert [r.root for r in roots] == pytest.approx([a, b], abs=1e-10)


def test_scan_needs_enough_points():
    with pytest.raises(ValueError):
        find_roots_on_interval(math.sin, 0.0, 1.0, scan_points=4)


def test_bracket_rejects_same_signs():
    with pytest.raises(InvalidBracket):
        Bracket(0.0, 1.0, 1.0, 2.0)
    with pytest.raises(InvalidBracket):
        Bracket(1.0, 0.0, -1.0, 1.0)


def test_predicate_boundary_stays_on_the_low_side():
    x = bisect_predicate_boundary(lambda v: v < 0.3, 0.0, 1.0, 1e-9)
    assert 0.3 - 1e-9 <= x < 0.3


def test_predicate_boundary_needs_a_flip():
    with pytest.raises(InvalidBracket):
        bisect_predicate_boundary(lambda v: True, 0.0, 1.0, 1e-6)


def test_minimum_found_between_scan_points():
    found = minimize_on_scan(lambda x: (x - 0.3712) ** 2 - 1.0, 0.0, 1.0, 16, 1e-10)
    assert found.x == pytest.approx(0.3712, abs=1e-7)
    assert found.value == pytest.approx(-1.0, abs=1e-12)
    assert found.lo <= found.x <= found.hi
