import numpy as np
import pytest
from hypothesis import given, strategies as st

from motstab.errors import TooLarge
from motstab.lp import LinearProgram, Status, enumerate_vertices, solve_lp, vertex_minimum

TRANSPORT_2x2 = np.array([[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1]], dtype=float)


def transport(m, n, a, b, cost):
    A = np.vstack([np.kron(np.eye(m), np.ones(n)), np.kron(np.ones(m), np.eye(n))])
    return LinearProgram(np.ravel(cost), A, np.concatenate([a, b]))


def test_forced_objective():
    sol = solve_lp(LinearProgram([1.0, 1.0], [[1.0, 1.0]], [1.0]))
    assert sol.optimal and sol.value == pytest.approx(1.0)


def test_infeasible():
    assert solve_lp(LinearProgram([1.0], [[1.0]], [-1.0])).status is Status.INFEASIBLE
    assert solve_lp(LinearProgram([1.0], [[1.0]], [-1.0]), exact=True).status is Status.INFEASIBLE
    # inconsistent duplicate rows
    assert solve_lp(LinearProgram([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])).status is Status.INFEASIBLE


def test_unbounded():
    assert solve_lp(LinearProgram([-1.0, 0.0], [[1.0, -1.0]], [0.0])).status is Status.UNBOUNDED


@pytest.mark.parametrize("exact", [False, True])
def test_transport_2x2(exact):
    lp = LinearProgram([0.0, 1.0, 1.0, 0.0], TRANSPORT_2x2, [0.5, 0.5, 0.5, 0.5])
    sol = solve_lp(lp, exact=exact)
    assert sol.value == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(sol.primal, [0.5, 0, 0, 0.5])


def test_vertices_2x2():
    lp = LinearProgram([0.0, 1.0, 1.0, 0.0], TRANSPORT_2x2, [0.5, 0.5, 0.5, 0.5])
    verts = enumerate_vertices(lp)
    assert len(verts) == 2
    assert sorted(v.value for v in verts) == pytest.approx([0.0, 1.0])


def test_vertex_edge_cases():
    verts = enumerate_vertices(LinearProgram([1.0], [[1.0]], [1.0]))
    assert len(verts) == 1 and verts[0].primal.tolist() == [1.0]
    assert enumerate_vertices(LinearProgram([1.0], [[1.0]], [-1.0])) == []


def test_vertex_guard():
    with pytest.raises(TooLarge):
        enumerate_vertices(LinearProgram(np.zeros(25), np.ones((1, 25)), [1.0]))


def test_deterministic():
    rng = np.random.default_rng(0)
    lp = transport(3, 3, np.full(3, 1 / 3), np.full(3, 1 / 3), rng.integers(0, 3, size=9).astype(float))
    a, b = solve_lp(lp), solve_lp(lp)
    assert a.basis == b.basis and np.array_equal(a.primal, b.primal)


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_float_exact_and_vertices_agree(m, n, seed):
    # dyadic marginals, so both sides sum to exactly 1 in rational arithmetic
    rng = np.random.default_rng(seed)
    a = rng.multinomial(16 - m, np.ones(m) / m) + 1.0
    b = rng.multinomial(16 - n, np.ones(n) / n) + 1.0
    lp = transport(m, n, a / 16, b / 16, rng.integers(-3, 4, size=(m, n)).astype(float))
    fl = solve_lp(lp)
    ex = solve_lp(lp, exact=True)
    assert fl.optimal and ex.optimal
    assert fl.value == pytest.approx(ex.value, abs=1e-9)
    assert fl.value == pytest.approx(vertex_minimum(lp), abs=1e-7)
    assert lp.residual(fl.primal) <= 1e-8
    assert fl.primal.min() >= 0


@given(st.integers(0, 2**32 - 1))
def test_degenerate_small_spacing(seed):
    # near-coincident columns, as produced by dilated marginals
    rng = np.random.default_rng(seed)
    eps = 2.0 ** -int(rng.integers(8, 14))
    y = np.sort(np.concatenate([np.array([-2.0, 0.0, 2.0]) - eps, np.array([-2.0, 0.0, 2.0]) + eps]))
    x = np.array([-1.0, 1.0])
    m, n = x.size, y.size
    a = np.full(m, 0.5)
    b = np.full(n, 1.0 / n)
    A = np.vstack([np.kron(np.eye(m), np.ones(n)), np.kron(np.ones(m), np.eye(n))])
    cost = np.abs(x[:, None] - y[None, :]) ** 3 + rng.random((m, n))
    sol = solve_lp(LinearProgram(cost.ravel(), A, np.concatenate([a, b])))
    assert sol.optimal
    assert sol.value == pytest.approx(vertex_minimum(LinearProgram(cost.ravel(), A, np.concatenate([a, b]))),
                                      abs=1e-7)
