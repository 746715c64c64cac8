"""Fitzpatrick functions of order n on finite graphs.

For a chain ``(i_1, ..., i_{n-1})`` of graph indices the order-n function
collects

    <x*, s_{i_1}> + sum_t W[i_t, i_{t+1}] + <s*_{i_{n-1}}, x - s_{i_{n-1}}>

and ``F(x, x*)`` is the maximum over all chains.  On a finite graph this is
an exact max of ``m**(n-1)`` affine functions of ``(x, x*)``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (BudgetExceeded, DimensionError, OperatorGraph, PreconditionWarning,
                   Tolerances, as_vector, weight_matrix)

__all__ = [
    "FitzEvaluation",
    "NAIVE_BUDGET",
    "eval_fitz",
    "fitz_values",
    "classical_fitz",
    "candidate_test",
    "translate",
    "chain_value",
]

NAIVE_BUDGET = 10**6


@dataclass(frozen=True)
class FitzEvaluation:
    value: float
    argmax_chain: tuple
    slope_x: np.ndarray
    slope_xstar: np.ndarray

    @property
    def subgradient(self):
        return self.slope_x, self.slope_xstar


def _check(graph, n, x, x_star):
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    d = graph.dimension
    return int(n), as_vector(x, "x", d), as_vector(x_star, "x_star", d)


def _start_terms(graph, x_star):
    return graph.points @ x_star


def _end_terms(graph, x):
    return graph.duals @ x - np.sum(graph.duals * graph.points, axis=1)


def chain_value(graph, chain, x, x_star):
    """Direct evaluation of one chain's affine piece, straight from the formula."""
    chain = list(chain)
    P, D = graph.points, graph.duals
    total = float(np.dot(x_star, P[chain[0]]))
    for a, b in zip(chain, chain[1:]):
        total += float(np.dot(D[a], P[b] - P[a]))
    last = chain[-1]
    return total + float(np.dot(D[last], np.asarray(x) - P[last]))


def classical_fitz(graph, x, x_star):
    """Order-2 Fitzpatrick function ``max_i <x*, s_i> + <s_i*, x> - <s_i*, s_i>``.

    Returns ``(value, index)`` with the smallest maximizing index.
    """
    vals = _start_terms(graph, x_star) + _end_terms(graph, x)
    i = int(np.argmax(vals))
    return float(vals[i]), i


def _naive(graph, n, x, x_star, budget):
    m = graph.size
    k = n - 1
    if m**k > budget:
        raise BudgetExceeded(f"naive evaluation needs {m}^{k} = {m**k} chains (budget {budget})")
    P, D = graph.points, graph.duals
    chains = np.array(list(itertools.product(range(m), repeat=k)), dtype=np.intp)
    vals = P[chains[:, 0]] @ x_star
    for t in range(k - 1):
        a, b = chains[:, t], chains[:, t + 1]
        vals = vals + np.einsum("ij,ij->i", D[a], P[b] - P[a])
    last = chains[:, -1]
    vals = vals + np.einsum("ij,ij->i", D[last], x[None, :] - P[last])
    best = vals.max()
    first = int(np.flatnonzero(vals >= best - 1e-12 * max(1.0, abs(best)))[0])
    return float(best), tuple(int(i) for i in chains[first])


def _dp(graph, n, x, x_star):
    W = weight_matrix(graph)
    # suffix[k][i]: best continuation from i with k more chain steps
    suffix = [_end_terms(graph, x)]
    for _ in range(n - 2):
        suffix.append(np.max(W + suffix[-1][None, :], axis=1))
    head = _start_terms(graph, x_star) + suffix[-1]
    best = float(head.max())
    eps = 1e-12 * max(1.0, abs(best))
    cur = int(np.flatnonzero(head >= best - eps)[0])
    chain = [cur]
    for k in range(n - 2, 0, -1):
        options = W[cur] + suffix[k - 1]
        target = suffix[k][cur]
        cur = int(np.flatnonzero(options >= target - 1e-12 * max(1.0, abs(target)))[0])
        chain.append(cur)
    return best, tuple(chain)


def eval_fitz(graph, n, x, x_star, method="dp", budget=NAIVE_BUDGET):
    """Evaluate ``F_{S,n}(x, x*)`` together with a maximizing chain.

    ``method="dp"`` runs a max-plus recursion over chain positions (the
    classical formula when ``n == 2``); ``"naive"`` enumerates every chain.
    The returned subgradient is ``(s*_{last}, s_{first})`` of the chain.
    """
    n, x, x_star = _check(graph, n, x, x_star)
    if method == "naive":
        value, chain = _naive(graph, n, x, x_star, budget)
    elif method == "dp":
        if n == 2:
            value, i = classical_fitz(graph, x, x_star)
            chain = (i,)
        else:
            value, chain = _dp(graph, n, x, x_star)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FitzEvaluation(value, chain, graph.duals[chain[-1]].copy(),
                          graph.points[chain[0]].copy())


def fitz_values(graph, n, X, Xstar):
    """Vectorized ``F_{S,n}`` over row-stacked query points (values only)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Xstar = np.atleast_2d(np.asarray(Xstar, dtype=np.float64))
    if X.shape != Xstar.shape or X.shape[1] != graph.dimension:
        raise DimensionError("query arrays must both have shape (N, d)")
    W = weight_matrix(graph)
    val = X @ graph.duals.T - np.sum(graph.duals * graph.points, axis=1)[None, :]
    for _ in range(n - 2):
        val = np.max(W[None, :, :] + val[:, None, :], axis=2)
    return np.max(Xstar @ graph.points.T + val, axis=1)


def translate(graph, w_star):
    """Graph of ``S' = S - w*``: every dual point shifted by ``-w*``."""
    w = as_vector(w_star, "w_star", graph.dimension)
    return OperatorGraph(graph.points, graph.duals - w[None, :])


def candidate_test(graph, n, x, x_star, tol=None, check_graph=True):
    """Whether adding ``(x, x*)`` keeps an n-monotone graph n-monotone.

    Tests ``F_{S,n}(x, x*) <= <x*, x> + feas_tol``.  The equivalence needs the
    graph itself to be n-monotone; if it is not, a `PreconditionWarning` is
    issued and the test is still evaluated.
    """
    from .monotonicity import is_n_monotone

    tol = tol or Tolerances()
    n, x, x_star = _check(graph, n, x, x_star)
    if check_graph and not is_n_monotone(graph, n, tol=tol).is_monotone:
        warnings.warn(f"graph is not {n}-monotone; candidate test is not an equivalence",
                      PreconditionWarning, stacklevel=2)
    return eval_fitz(graph, n, x, x_star).value <= float(x_star @ x) + tol.feas_tol
