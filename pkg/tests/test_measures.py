import numpy as np
import pytest
from hypothesis import given, strategies as st

from motstab.errors import NotProbability, ZeroMass
from motstab.lp import solve_lp
from motstab.measures import (DiscreteMeasure, atomwise_distance, bin, call_potential, convex_order, dilate, mean,
                              min_spacing, monotone_coupling, pooled, transport_cost_1d, wasserstein)
from motstab.transport import coupling_lp

D = DiscreteMeasure


@st.composite
def measures(draw, min_size=1, max_size=6):
    n = draw(st.integers(min_size, max_size))
    atoms = draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n, unique=True))
    raw = draw(st.lists(st.integers(1, 50), min_size=n, max_size=n))
    w = np.array(raw, dtype=float)
    return D(np.array(atoms, dtype=float) / 4, w / w.sum())


def test_canonical_form():
    m = D([3.0, 1.0, 1.0 + 1e-13, 2.0], [0.1, 0.2, 0.3, 0.0])
    assert m.atoms.tolist() == pytest.approx([1.0, 3.0])
    assert m.weights.tolist() == pytest.approx([0.5, 0.1])
    with pytest.raises(AttributeError):
        m.foo = 1
    with pytest.raises(ValueError):
        m.atoms[0] = 5.0


def test_identical_atoms_merge_exactly():
    # weighted averaging would move -3 by an ulp
    m = pooled([D([-3.0], [0.1]), D([-3.0, 1.0], [0.7, 0.2])])
    assert m.atoms[0] == -3.0


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        D([0.0, 1.0], [0.5])
    with pytest.raises(ValueError):
        D([0.0], [-0.1])
    with pytest.raises(ValueError):
        D([np.nan], [1.0])
    with pytest.raises(NotProbability):
        D([0.0], [0.5]).require_probability()


@pytest.mark.parametrize("m, expected", [
    (D.dirac(0.0), 0.0),
    (D([-1.0, 1.0], [0.5, 0.5]), 0.0),
    (D([-2.0, 2.0], [0.75, 0.25]), -1.0),
])
def test_mean(m, expected):
    assert mean(m) == pytest.approx(expected, abs=1e-15)


def test_mean_of_zero_measure():
    with pytest.raises(ZeroMass):
        mean(D.zero())


def test_wasserstein_examples():
    assert wasserstein(D.dirac(0.0), D.dirac(1.0)) == 1.0
    assert wasserstein(D([0.0, 1.0], [0.5, 0.5]), D.dirac(0.5)) == pytest.approx(0.5)
    p = D([0.0, 2.0, 5.0], [0.2, 0.3, 0.5])
    assert wasserstein(p, p) == 0.0
    assert wasserstein(D.dirac(0.0), D.dirac(3.0), r=2) == pytest.approx(3.0)


@given(measures(), measures(), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_quantile_cost_matches_lp(p, q, r):
    C = np.abs(p.atoms[:, None] - q.atoms[None, :]) ** r
    assert transport_cost_1d(p, q, r) == pytest.approx(solve_lp(coupling_lp(p, q, C)).value, abs=1e-9)


@given(measures(), measures())
def test_monotone_coupling_marginals(p, q):
    plan = np.zeros((p.size, q.size))
    for i, j, m in monotone_coupling(p, q):
        plan[i, j] += m
    np.testing.assert_allclose(plan.sum(axis=1), p.weights, atol=1e-12)
    np.testing.assert_allclose(plan.sum(axis=0), q.weights, atol=1e-12)


@given(measures(), measures(), measures())
def test_wasserstein_triangle(a, b, c):
    assert wasserstein(a, c) <= wasserstein(a, b) + wasserstein(b, c) + 1e-12


def test_convex_order_examples():
    pm1 = D([-1.0, 1.0], [0.5, 0.5])
    pm2 = D([-2.0, 2.0], [0.5, 0.5])
    assert convex_order(D.dirac(0.0), pm1)
    assert not convex_order(pm1, D.dirac(0.0))
    assert convex_order(pm1, pm2)
    assert not convex_order(D.dirac(0.0), D.dirac(1.0))


def test_call_potential():
    m = D([-1.0, 1.0], [0.5, 0.5])
    np.testing.assert_allclose(call_potential(m, [-2.0, 0.0, 2.0]), [2.0, 0.5, 0.0])


def test_bin_examples():
    assert bin(D.dirac(0.3), 1.0) == D.dirac(0.3)
    assert bin(D([0.2, 0.8], [0.5, 0.5]), 1.0).allclose(D.dirac(0.5))
    with pytest.raises(ValueError):
        bin(D.dirac(0.0), 0.0)


@given(measures(), st.sampled_from([0.1, 0.25, 0.5, 1.0, 3.0]))
def test_bin_is_convex_smaller_and_close(m, h):
    b = bin(m, h)
    assert convex_order(b, m)
    assert wasserstein(b, m) <= h + 1e-12


def test_dilate_example():
    assert dilate(D.dirac(0.0), 1.0).allclose(D([-1.0, 1.0], [0.5, 0.5]))
    assert dilate(D.dirac(0.0), 0.0) == D.dirac(0.0)


@given(measures(), st.sampled_from([0.01, 0.1, 0.125, 0.5, 2.0]))
def test_dilate_properties(m, eps):
    d = dilate(m, eps)
    assert mean(d) == pytest.approx(mean(m), abs=1e-12)
    assert convex_order(m, d)
    w = wasserstein(d, m)
    assert w <= eps + 1e-12
    if min_spacing(m) >= 2 * eps:
        assert w == pytest.approx(eps, abs=1e-12)


def test_algebra():
    a, b = D([0.0], [0.5]), D([0.0, 1.0], [0.25, 0.25])
    s = a + b
    assert s.allclose(D([0.0, 1.0], [0.75, 0.25]))
    assert (2 * b).total_mass == pytest.approx(1.0)
    assert b.normalized().is_probability()
    assert b.translate(1.0).atoms.tolist() == [1.0, 2.0]
    assert atomwise_distance(a, b) == pytest.approx(0.25)
    assert s.mass_at(0.0) == pytest.approx(0.75)
    assert s.hull == (0.0, 1.0)
