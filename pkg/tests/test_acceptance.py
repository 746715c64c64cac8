"""Acceptance criteria, one test each, at the stated tolerances.

A summary line per criterion is printed at the end of the pytest run.
"""

import time

import numpy as np
import pytest

from cyclomon import (OperatorGraph, NotCyclicallyMonotone, certify_extension,
                      domain_sandwich_check, duality_gap_report, enumerate_pieces,
                      eval_conjugate, eval_fitz, is_n_monotone, pairing_dominance_scan,
                      rockafellar_potential, solve_extension, translate, verify_potential)
from cyclomon.fitzpatrick import _dp, classical_fitz
from cyclomon.generators import (random_cyclic_graph, random_graph, random_instance,
                                 random_monotone_graph)

from conftest import g1_instance, make_g1, make_g2, make_g4

KINDS = (random_graph, random_monotone_graph, random_cyclic_graph)


def population(size=240, seed=1):
    """Random graphs with m <= 4, d <= 3 and an order n <= 5 for each."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(size):
        m, d, n = int(rng.integers(1, 5)), int(rng.integers(1, 4)), int(rng.integers(2, 6))
        out.append((KINDS[k % 3](rng, m, d), n))
    return out


@pytest.mark.criterion(1)
def test_monotonicity_oracle_equivalence(criterion):
    pop = population()
    start = time.perf_counter()
    worst = 0.0
    disagree = 0
    for g, n in pop:
        a = is_n_monotone(g, n, method="bruteforce")
        b = is_n_monotone(g, n, method="maxplus")
        disagree += a.is_monotone != b.is_monotone
        worst = max(worst, abs(a.worst_sum - b.worst_sum))
    elapsed = time.perf_counter() - start
    criterion["detail"] = (f"{len(pop)} graphs, {disagree} verdict mismatches, "
                           f"max |sum diff| {worst:.1e}, {elapsed:.2f} s")
    assert len(pop) >= 200
    assert disagree == 0 and worst <= 1e-9 and elapsed < 10.0


@pytest.mark.criterion(2)
def test_fitzpatrick_oracle_equivalence(criterion):
    rng = np.random.default_rng(2)
    worst = 0.0
    inexact = 0
    for g, n in population():
        for _ in range(100):
            x, xs = rng.normal(size=(2, g.dimension)) * 2
            a = eval_fitz(g, n, x, xs, method="naive").value
            b = eval_fitz(g, n, x, xs, method="dp").value
            worst = max(worst, abs(a - b))
            two = eval_fitz(g, 2, x, xs).value
            inexact += not (two == classical_fitz(g, x, xs)[0] == _dp(g, 2, x, xs)[0])
    criterion["detail"] = f"max |naive - dp| {worst:.1e}, {inexact} inexact n=2 values"
    assert worst <= 1e-9 and inexact == 0


@pytest.mark.criterion(3)
def test_rotation_witness(criterion):
    g4 = make_g4()
    two, three = is_n_monotone(g4, 2), is_n_monotone(g4, 3)
    cycle = [i + 1 for i in three.worst_cycle]
    criterion["detail"] = (f"n=2 worst {two.worst_sum:g}; n=3 worst {three.worst_sum:g} "
                           f"on cycle {cycle} (1-based)")
    assert two.is_monotone and abs(two.worst_sum) <= 1e-12
    assert not three.is_monotone and abs(three.worst_sum - 2.0) <= 1e-12
    assert cycle == [1, 2, 3]


@pytest.mark.criterion(4)
def test_hand_lp_values(criterion):
    g1 = make_g1()
    a = eval_conjugate(g1, 2, [0.5], [0.5]).value
    b = eval_conjugate(g1, 2, [0.2], [0.8]).value
    c = eval_conjugate(g1, 3, [0.5], [0.25]).value
    criterion["detail"] = f"values {a:.10g}, {b}, {c:.10g}"
    assert abs(a - 0.5) <= 1e-8 and b == np.inf and abs(c - 0.5) <= 1e-8


@pytest.mark.criterion(5)
def test_extension_closed_loop(criterion):
    rng = np.random.default_rng(5)
    slowest, most_iter, failures = 0.0, 0, 0
    for k in range(50):
        m, d = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        inst = random_instance(rng, m, d, (2, 3, 4)[k % 3])
        assert np.linalg.eigvalsh(inst.B.symmetric_sum).min() > 0
        start = time.perf_counter()
        res = solve_extension(inst)
        ok = certify_extension(inst, res.x).is_monotone
        slowest = max(slowest, time.perf_counter() - start)
        most_iter = max(most_iter, res.iterations)
        failures += not (res.phi_value <= 1e-7 and res.iterations <= 500 and ok)
    criterion["detail"] = (f"50 instances, {failures} failures, max {most_iter} iterations, "
                           f"slowest {slowest:.3f} s")
    assert failures == 0 and slowest < 2.0


@pytest.mark.criterion(6)
def test_hand_extension_values(criterion):
    a = solve_extension(g1_instance(1.0, 0.0))
    b = solve_extension(g1_instance(1.0, 1.0), minimize=True)
    c = solve_extension(g1_instance(0.0, 0.5), minimize=True)
    criterion["detail"] = (f"x={a.x[0]:.1e} certified={a.certified}; min phi {b.phi_value:.8f} "
                           f"at {b.x[0]:.6f}; min phi {c.phi_value:.8f}")
    assert abs(a.x[0]) <= 1e-6 and a.certified
    assert abs(b.phi_value + 0.25) <= 1e-6 and abs(b.x[0] - 0.5) <= 1e-4
    assert abs(c.phi_value + 0.25) <= 1e-6


@pytest.mark.criterion(7)
def test_pairing_dominance_order_two(criterion):
    rng = np.random.default_rng(7)
    total = 0
    for k in range(20):
        g = random_monotone_graph(rng, int(rng.integers(2, 5)), int(rng.integers(1, 4)))
        assert is_n_monotone(g, 2).is_monotone
        total += len(pairing_dominance_scan(g, 2, 1000, seed=k).violations)
    criterion["detail"] = f"20 graphs x 1000 samples, {total} violations"
    assert total == 0


@pytest.mark.criterion(8)
def test_translation_identities(criterion):
    rng = np.random.default_rng(8)
    worst_f, worst_c, checked = 0.0, 0.0, 0
    for g in (make_g1(), make_g4()):
        d = g.dimension
        for k in range(100):
            n = 2 + k % 3
            w = rng.normal(size=d)
            shifted = translate(g, w)
            x, xs = rng.normal(size=(2, d)) * 2
            lhs = eval_fitz(shifted, n, x, xs).value
            rhs = eval_fitz(g, n, x, xs + w).value - float(w @ x)
            worst_f = max(worst_f, abs(lhs - rhs))
            ps = enumerate_pieces(shifted, n, prune=True)
            lam = rng.dirichlet(np.ones(len(ps)))
            ys, y = lam @ ps.slope_x, lam @ ps.slope_xstar
            lhs = eval_conjugate(shifted, n, ys, y).value
            rhs = eval_conjugate(g, n, ys + w, y).value - float(w @ y)
            worst_c = max(worst_c, abs(lhs - rhs))
            checked += 1
    criterion["detail"] = f"{checked} points, F err {worst_f:.1e}, F* err {worst_c:.1e}"
    assert worst_f <= 1e-9 and worst_c <= 1e-7


@pytest.mark.criterion(9)
def test_duality_gap(criterion):
    gaps, lows = [], []
    for B, w in ((1.0, 0.0), (1.0, 1.0), (0.0, 0.5)):
        rep = duality_gap_report(g1_instance(B, w))
        gaps.append(rep.gap)
        lows.append(rep.pointwise_min)
    criterion["detail"] = f"max gap {max(gaps):.1e}, min pointwise sum {min(lows):.3g}"
    assert max(gaps) <= 1e-6 and min(lows) >= -1e-7


@pytest.mark.criterion(10)
def test_potential_construction(criterion):
    g1 = make_g1()
    f = rockafellar_potential(g1)
    grid = np.linspace(-2, 3, 101)
    err = float(np.max(np.abs(f(grid[:, None]) - np.maximum(0, grid - 1))))
    verified = verify_potential(g1, f, grid[:, None])
    with pytest.raises(NotCyclicallyMonotone) as info:
        rockafellar_potential(make_g2())
    s = info.value.report.worst_sum
    criterion["detail"] = f"grid err {err:.1e}, verified {verified}, G2 cycle sum {s:g}"
    assert err <= 1e-12 and verified and s == 1.0


@pytest.mark.criterion(11)
def test_domain_sandwich(criterion):
    failures = 0
    for g in (make_g1(), make_g4()):
        for n in (2, 3, 4):
            failures += len(domain_sandwich_check(g, n, 500).failures)
    criterion["detail"] = f"2 graphs x 3 orders x 500 samples, {failures} infinite values"
    assert failures == 0
