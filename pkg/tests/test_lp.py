import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from lipfree.exceptions import DomainError
from lipfree.lp import (INFEASIBLE, OPTIMAL, STALLED, UNBOUNDED, LinearProgram,
                        TransportationInstance, format_flow, solve_lp, solve_transportation)

from oracles import transport_highs


def test_trivial_bound():
    res = solve_lp(LinearProgram([1.0], A_ub=[[1.0]], b_ub=[1.0]))
    assert res.status == OPTIMAL and res.value == pytest.approx(1.0)
    assert res.x == pytest.approx([1.0])
    assert res.duals_ub == pytest.approx([1.0])


def test_unbounded():
    assert solve_lp(LinearProgram([1.0])).status == UNBOUNDED


def test_infeasible():
    lp = LinearProgram([1.0, 1.0], A_ub=[[1.0, 1.0]], b_ub=[-1.0])
    assert solve_lp(lp).status == INFEASIBLE


def test_equality_and_free_variables():
    # maximize x - y, x + y = 1, x in [-2, 3], y free but y >= -5 via bound
    lp = LinearProgram([1.0, -1.0], A_eq=[[1.0, 1.0]], b_eq=[1.0],
                       bounds=[(-2, 3), (-5, None)])
    res = solve_lp(lp)
    assert res.status == OPTIMAL and res.value == pytest.approx(5.0)
    assert res.x == pytest.approx([3.0, -2.0])


def test_redundant_equalities():
    lp = LinearProgram([1.0, 2.0], A_eq=[[1, 1], [2, 2]], b_eq=[1, 2],
                       bounds=[(0, None), (0, None)])
    res = solve_lp(lp)
    assert res.status == OPTIMAL and res.value == pytest.approx(2.0)


def test_iteration_cap_reports_stalled():
    rng = np.random.default_rng(3)
    A = rng.random((6, 6))
    res = solve_lp(LinearProgram(rng.random(6), A_ub=A, b_ub=np.ones(6)), max_iter=1)
    assert res.status == STALLED and res.value is None


def test_degenerate_cycling_example():
    # Beale's example cycles under the textbook largest-coefficient rule
    c = np.array([0.75, -150, 0.02, -6])
    A = np.array([[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]])
    b = np.array([0, 0, 1.0])
    res = solve_lp(LinearProgram(c, A_ub=A, b_ub=b))
    assert res.status == OPTIMAL and res.value == pytest.approx(0.05)


@given(st.integers(0, 10**6), st.integers(2, 6), st.integers(1, 6))
def test_matches_highs(seed, n, m):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n))
    b = rng.uniform(0.5, 2.0, m)
    c = rng.normal(size=n)
    bounds = [(-1.0, 1.0)] * n
    ours = solve_lp(LinearProgram(c, A_ub=A, b_ub=b, bounds=bounds))
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    assert ours.status == OPTIMAL
    assert ours.value == pytest.approx(-ref.fun, abs=1e-7)
    assert np.all(A @ ours.x <= b + 1e-8)
    # strong duality on the inequality rows plus bounds
    assert np.all(ours.duals_ub >= -1e-9)


def test_transport_single_arc():
    r = solve_transportation(TransportationInstance([1.0], [1.0], [[1.0]]))
    assert r.cost == pytest.approx(1.0)


def test_transport_forced_split():
    r = solve_transportation(TransportationInstance([1.0], [0.5, 0.5], [[1.0, 2.0]]))
    assert r.cost == pytest.approx(1.5)
    assert r.flow == pytest.approx(np.array([[0.5, 0.5]]))


def test_transport_unbalanced():
    with pytest.raises(DomainError):
        solve_transportation(TransportationInstance([1.0], [0.5], [[1.0]]))


@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 5))
def test_transport_matches_lp_and_highs(seed, m, k):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.1, 1.0, m)
    b = rng.uniform(0.1, 1.0, k)
    b *= a.sum() / b.sum()
    C = rng.uniform(0.0, 3.0, (m, k))
    inst = TransportationInstance(a, b, C)
    tr = solve_transportation(inst)
    lp = solve_lp(inst.as_lp())
    assert lp.status == OPTIMAL
    assert tr.cost == pytest.approx(-lp.value, abs=1e-7)
    assert tr.cost == pytest.approx(transport_highs(a, b, C), abs=1e-7)
    assert tr.flow.sum(axis=1) == pytest.approx(a, abs=1e-9)
    assert tr.flow.sum(axis=0) == pytest.approx(b, abs=1e-9)
    # potentials certify optimality: feasible, tight on used arcs
    gap = C - (tr.u[:, None] - tr.v[None, :])
    assert gap.min() >= -1e-9
    assert np.abs(tr.flow * gap).sum() < 1e-8


def test_format_flow():
    text = format_flow(np.array([[0.5, 0.0]]), ["a"], ["b", "c"])
    assert "a" in text and "0.5" in text
