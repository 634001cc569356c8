import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import random_coupling, random_measure, random_table
from motstab.costs import Pointwise
from motstab.errors import NotProbability, TooLarge
from motstab.measures import DiscreteMeasure as D, wasserstein
from motstab.transport import TransportPlan, check_cyclical_monotone, solve_ot

SQUARE = Pointwise.named("square")
ABS = Pointwise.named("abs")
seeds = st.integers(0, 2**32 - 1)


def test_dirac_source_is_product():
    nu = D([1.0, 2.0, 4.0], [0.2, 0.3, 0.5])
    plan, value = solve_ot(D.dirac(0.0), nu, ABS)
    np.testing.assert_allclose(plan.mass, [nu.weights])
    assert value == pytest.approx(0.2 * 1 + 0.3 * 2 + 0.5 * 4)


def test_square_cost_is_monotone():
    plan, value = solve_ot(D([0.0, 1.0], [0.5, 0.5]), D([2.0, 3.0], [0.5, 0.5]), SQUARE)
    np.testing.assert_allclose(plan.mass, [[0.5, 0.0], [0.0, 0.5]])
    assert value == pytest.approx(4.0)


@given(seeds)
def test_abs_value_is_w1(seed):
    rng = np.random.default_rng(seed)
    mu, nu = random_measure(rng, int(rng.integers(1, 5))), random_measure(rng, int(rng.integers(1, 5)))
    plan, value = solve_ot(mu, nu, ABS)
    assert value == pytest.approx(wasserstein(mu, nu), abs=1e-9)
    assert plan.check_marginals(mu, nu)
    assert plan.mass.min() >= 0


def test_requires_probabilities():
    with pytest.raises(NotProbability):
        solve_ot(D([0.0], [0.5]), D([0.0], [1.0]), ABS)


def test_plan_accessors():
    plan = TransportPlan([0.0, 1.0], [2.0, 3.0], [[0.25, 0.25], [0.0, 0.5]])
    assert plan.row(1) == D.dirac(3.0)
    assert plan.row(0).allclose(D([2.0, 3.0], [0.5, 0.5]))
    assert plan.support() == [(0, 0), (0, 1), (1, 1)]
    assert plan.cost(SQUARE) == pytest.approx(0.25 * 4 + 0.25 * 9 + 0.5 * 4)
    with pytest.raises(ValueError):
        TransportPlan([1.0, 0.0], [0.0], [[0.5], [0.5]])


def test_anti_monotone_square_violation():
    plan = TransportPlan([0.0, 1.0], [2.0, 3.0], [[0.0, 0.5], [0.5, 0.0]])
    rep = check_cyclical_monotone(plan, SQUARE, max_cycle=2)
    assert rep.is_violated
    assert rep.gap == pytest.approx(2.0)


def test_single_point_plan():
    plan = TransportPlan([0.0], [1.0], [[1.0]])
    assert not check_cyclical_monotone(plan, SQUARE, max_cycle=2).is_violated


def test_cycle_budget():
    rng = np.random.default_rng(0)
    plan = TransportPlan(np.arange(6.0), np.arange(6.0), rng.random((6, 6)) / 18)
    with pytest.raises(TooLarge):
        check_cyclical_monotone(plan, ABS, max_cycle=36)


@given(seeds)
def test_optimal_plans_are_cyclically_monotone(seed):
    rng = np.random.default_rng(seed)
    mu, nu = random_measure(rng, int(rng.integers(1, 4))), random_measure(rng, int(rng.integers(1, 4)))
    c = random_table(rng, mu, nu)
    plan, _ = solve_ot(mu, nu, c)
    rep = check_cyclical_monotone(plan, c, max_cycle=max(2, len(plan.support())))
    assert not rep.is_violated


@given(seeds)
def test_short_cycles_decide_all_cycles(seed):
    # a cycle revisiting an x-atom splits into shorter cycles with the same total gain
    rng = np.random.default_rng(seed)
    mu, nu = random_measure(rng, int(rng.integers(1, 4))), random_measure(rng, int(rng.integers(2, 4)))
    plan = random_coupling(rng, mu, nu)
    if len(plan.support()) > 7:
        return
    c = random_table(rng, mu, nu)
    full = check_cyclical_monotone(plan, c, max_cycle=max(2, len(plan.support())))
    short = check_cyclical_monotone(plan, c, max_cycle=max(2, plan.shape[0]))
    assert full.is_violated == short.is_violated
    assert full.gap >= short.gap - 1e-12
