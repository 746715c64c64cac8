import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclomon import (OperatorGraph, PreconditionWarning, candidate_test, eval_fitz,
                      is_n_monotone, translate)
from cyclomon.core import BudgetExceeded
from cyclomon.fitzpatrick import chain_value, classical_fitz, fitz_values
from cyclomon.generators import random_cyclic_graph, random_graph, random_monotone_graph


def oracle(graph, n, x, x_star):
    """Max over every chain, one chain at a time."""
    return max(chain_value(graph, c, x, x_star)
               for c in itertools.product(range(graph.size), repeat=n - 1))


def g1_n3_formula(x, xs):
    return max(0.0, x - 1, xs - 1, x + xs - 1)


def cases(max_m=4, max_d=3, max_n=5):
    def build(args):
        m, d, n, kind, seed = args
        rng = np.random.default_rng(seed)
        g = [random_graph, random_monotone_graph, random_cyclic_graph][kind](rng, m, d)
        return g, n, rng.normal(size=d) * 2, rng.normal(size=d) * 2
    return st.tuples(st.integers(1, max_m), st.integers(1, max_d), st.integers(2, max_n),
                     st.integers(0, 2), st.integers(0, 2**32 - 1)).map(build)


@pytest.mark.parametrize("method", ["dp", "naive"])
def test_examples(g1, method):
    assert eval_fitz(g1, 2, [0.5], [0.5], method=method).value == 0.0
    assert eval_fitz(g1, 3, [0.5], [0.5], method=method).value == 0.0
    one = OperatorGraph([[1.0]], [[1.0]])
    assert eval_fitz(one, 3, [1.0], [1.0], method=method).value == 1.0


@pytest.mark.parametrize("x, xs", [(0.5, 0.5), (2.0, 0.0), (0.0, 3.0), (1.5, 1.5), (-1, -2)])
def test_g1_order3_hand_formula(g1, x, xs):
    for method in ("dp", "naive"):
        assert eval_fitz(g1, 3, [x], [xs], method=method).value == pytest.approx(
            g1_n3_formula(x, xs), abs=1e-12)


def test_g1_order2_pieces(g1):
    for x, xs in [(0.5, 0.5), (2, 1), (-1, 0.3)]:
        assert eval_fitz(g1, 2, [x], [xs]).value == pytest.approx(max(0, x + xs - 1), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(cases())
def test_naive_matches_dp(case):
    g, n, x, xs = case
    a = eval_fitz(g, n, x, xs, method="naive")
    b = eval_fitz(g, n, x, xs, method="dp")
    assert abs(a.value - b.value) <= 1e-9
    assert abs(a.value - oracle(g, n, x, xs)) <= 1e-9 * max(1, abs(a.value))
    assert a.argmax_chain == b.argmax_chain or abs(
        chain_value(g, b.argmax_chain, x, xs) - a.value) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(cases())
def test_chain_reproduces_value_and_subgradient(case):
    g, n, x, xs = case
    ev = eval_fitz(g, n, x, xs)
    assert len(ev.argmax_chain) == n - 1
    assert abs(chain_value(g, ev.argmax_chain, x, xs) - ev.value) <= 1e-9 * max(1, abs(ev.value))
    np.testing.assert_array_equal(ev.slope_x, g.duals[ev.argmax_chain[-1]])
    np.testing.assert_array_equal(ev.slope_xstar, g.points[ev.argmax_chain[0]])


@settings(max_examples=200, deadline=None)
@given(cases(max_n=2))
def test_order2_is_classical_formula_exactly(case):
    g, _, x, xs = case
    P, D = g.points, g.duals
    direct = max(float(xs @ P[i] + D[i] @ x - D[i] @ P[i]) for i in range(g.size))
    value, _ = classical_fitz(g, x, xs)
    assert eval_fitz(g, 2, x, xs).value == value
    assert value == pytest.approx(direct, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(cases())
def test_batch_values_match(case):
    g, n, x, xs = case
    got = fitz_values(g, n, np.vstack([x, xs]), np.vstack([xs, x]))
    assert got[0] == pytest.approx(eval_fitz(g, n, x, xs).value, abs=1e-9)
    assert got[1] == pytest.approx(eval_fitz(g, n, xs, x).value, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(cases())
def test_graph_points(case):
    g, n, _, _ = case
    monotone = is_n_monotone(g, n).is_monotone
    for s, s_star in g:
        value = eval_fitz(g, n, s, s_star).value
        p = float(s @ s_star)
        assert value >= p - 1e-9
        if monotone:
            assert value == pytest.approx(p, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(cases(), st.integers(0, 2**32 - 1))
def test_translation_identity(case, seed):
    g, n, x, xs = case
    w = np.random.default_rng(seed).normal(size=g.dimension)
    lhs = eval_fitz(translate(g, w), n, x, xs).value
    rhs = eval_fitz(g, n, x, xs + w).value - float(w @ x)
    assert abs(lhs - rhs) <= 1e-9 * max(1, abs(lhs))


@settings(max_examples=200, deadline=None)
@given(cases(), st.integers(0, 2**32 - 1))
def test_midpoint_convexity(case, seed):
    g, n, x, xs = case
    r = np.random.default_rng(seed)
    y, ys = r.normal(size=g.dimension), r.normal(size=g.dimension)
    mid = eval_fitz(g, n, (x + y) / 2, (xs + ys) / 2).value
    ends = 0.5 * (eval_fitz(g, n, x, xs).value + eval_fitz(g, n, y, ys).value)
    assert mid <= ends + 1e-9 * max(1, abs(ends))


@settings(max_examples=200, deadline=None)
@given(cases(), st.integers(0, 2**32 - 1))
def test_subgradient_inequality(case, seed):
    g, n, x, xs = case
    r = np.random.default_rng(seed)
    ev = eval_fitz(g, n, x, xs)
    for _ in range(5):
        y, ys = r.normal(size=g.dimension) * 3, r.normal(size=g.dimension) * 3
        lower = ev.value + ev.slope_x @ (y - x) + (ys - xs) @ ev.slope_xstar
        assert eval_fitz(g, n, y, ys).value >= lower - 1e-9 * max(1, abs(lower))


def test_naive_budget():
    g = OperatorGraph(np.arange(101.0)[:, None], np.arange(101.0)[:, None])
    with pytest.raises(BudgetExceeded):
        eval_fitz(g, 4, [0.0], [0.0], method="naive")
    assert eval_fitz(g, 4, [0.0], [0.0]).value >= 0


def test_translate_examples(g1, g4):
    t = translate(g1, [1.0])
    np.testing.assert_array_equal(t.points, [[0], [1]])
    np.testing.assert_array_equal(t.duals, [[-1], [0]])
    assert translate(g4, [0, 0]) == g4
    assert not is_n_monotone(translate(g4, [1, 2]), 3).is_monotone
    assert not is_n_monotone(g4, 3).is_monotone


@settings(max_examples=100, deadline=None)
@given(cases(), st.integers(0, 2**32 - 1))
def test_translate_preserves_verdicts(case, seed):
    g, n, _, _ = case
    w = np.random.default_rng(seed).normal(size=g.dimension)
    a, b = is_n_monotone(g, n), is_n_monotone(translate(g, w), n)
    assert a.is_monotone == b.is_monotone
    assert a.worst_sum == pytest.approx(b.worst_sum, abs=1e-9)


def test_candidate_examples(g1):
    assert candidate_test(g1, 2, [0.5], [0.5])
    assert not candidate_test(g1, 2, [0.5], [-1.0])
    single = OperatorGraph([[0.5]], [[1.0]])
    for x, xs in [(1.0, 2.0), (0.0, 2.0), (0.5, -3.0)]:
        assert candidate_test(single, 2, [x], [xs]) == ((xs - 1.0) * (x - 0.5) >= 0)


def test_candidate_warns_on_nonmonotone_graph(g2):
    with pytest.warns(PreconditionWarning):
        candidate_test(g2, 2, [0.5], [0.5])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_candidate_closed_loop(m, d, n, seed):
    r = np.random.default_rng(seed)
    g = random_cyclic_graph(r, m, d)
    x, xs = r.normal(size=d), r.normal(size=d)
    # a cycle through the new pair once sums to F(x, x*) - <x*, x>
    gap = eval_fitz(g, n, x, xs).value - float(xs @ x)
    rep = is_n_monotone(g.with_pair(x, xs), n)
    assert rep.worst_sum >= gap - 1e-9
    if candidate_test(g, n, x, xs):
        assert rep.is_monotone
    else:
        assert not rep.is_monotone
