"""n-cyclic and cyclic monotonicity of finite graphs.

A graph is n-monotone when every closed walk ``i_1 -> ... -> i_n -> i_1``
through its pairs has nonpositive cyclic sum
``W[i_1, i_2] + ... + W[i_n, i_1]`` with ``W = weight_matrix(graph)``.
Walks may repeat indices; since ``W`` has zero diagonal, every walk of length
``k < n`` embeds in one of length ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BudgetExceeded, CyclomonError, Tolerances, as_vector, weight_matrix

__all__ = [
    "MonotonicityReport",
    "MaxAffineFunction",
    "NotCyclicallyMonotone",
    "BRUTEFORCE_BUDGET",
    "is_n_monotone",
    "is_cyclically_monotone",
    "cycle_sum",
    "rockafellar_potential",
    "verify_potential",
]

BRUTEFORCE_BUDGET = 10**6


@dataclass(frozen=True)
class MonotonicityReport:
    n: int | str
    is_monotone: bool
    worst_cycle: tuple
    worst_sum: float
    feas_tol: float
    method: str = "maxplus"

    def to_dict(self):
        return {
            "n": self.n,
            "is_monotone": self.is_monotone,
            "worst_cycle": list(self.worst_cycle),
            "worst_sum": self.worst_sum,
            "feas_tol": self.feas_tol,
            "method": self.method,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(n=data["n"], is_monotone=bool(data["is_monotone"]),
                   worst_cycle=tuple(int(i) for i in data["worst_cycle"]),
                   worst_sum=float(data["worst_sum"]), feas_tol=float(data["feas_tol"]),
                   method=data.get("method", "maxplus"))


class NotCyclicallyMonotone(CyclomonError):
    """Raised with a positive cycle attached as ``report``."""

    def __init__(self, report):
        super().__init__(
            f"graph has a positive cycle {list(report.worst_cycle)} "
            f"with sum {report.worst_sum:.6g}")
        self.report = report


def cycle_sum(W, walk):
    """Cyclic sum of ``W`` along ``walk``, closing back to its first index."""
    walk = list(walk)
    total = 0.0
    for a, b in zip(walk, walk[1:] + walk[:1]):
        total += W[a, b]
    return float(total)


def _tie_eps(value):
    return 1e-12 * max(1.0, abs(value))


def _bruteforce(W, n, budget):
    m = W.shape[0]
    if m**n > budget:
        raise BudgetExceeded(
            f"brute force needs {m}^{n} = {m**n} walks (budget {budget}); use method='maxplus'")
    # sums[i_1, ..., i_n] accumulated in walk order, lexicographic flat layout
    sums = np.zeros((m,) * n)
    for k in range(n):
        a, b = k, (k + 1) % n
        shape = [1] * n
        shape[a] = shape[b] = m
        term = W if a < b else W.T
        sums = sums + term.reshape(shape)
    flat = sums.ravel()
    best = flat.max()
    first = int(np.flatnonzero(flat >= best - _tie_eps(best))[0])
    return tuple(int(i) for i in np.unravel_index(first, sums.shape))


def _maxplus_powers(W, n):
    m = W.shape[0]
    P0 = np.full((m, m), -np.inf)
    np.fill_diagonal(P0, 0.0)
    powers = [P0]
    for _ in range(n):
        prev = powers[-1]
        powers.append(np.max(prev[:, :, None] + W[None, :, :], axis=1))
    return powers


def _maxplus(W, n):
    powers = _maxplus_powers(W, n)
    diag = np.diag(powers[n])
    best = diag.max()
    start = int(np.flatnonzero(diag >= best - _tie_eps(best))[0])
    walk = [start]
    cur = start
    for r in range(1, n):
        remaining = n - r
        target = powers[remaining + 1][cur, start]
        options = W[cur, :] + powers[remaining][:, start]
        nxt = int(np.flatnonzero(options >= target - _tie_eps(target))[0])
        walk.append(nxt)
        cur = nxt
    return tuple(walk)


def is_n_monotone(graph, n, method="maxplus", tol=None, budget=BRUTEFORCE_BUDGET):
    """Decide whether ``graph`` is n-cyclically monotone.

    ``method="bruteforce"`` enumerates all ``m**n`` walks; ``"maxplus"``
    takes the n-th max-plus power of the weight matrix and rebuilds the best
    walk from it.  Ties are broken towards the lexicographically smallest
    walk, and ``worst_sum`` is the direct sum along the reported walk.
    """
    tol = tol or Tolerances()
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    W = weight_matrix(graph)
    if method == "bruteforce":
        walk = _bruteforce(W, n, budget)
    elif method == "maxplus":
        walk = _maxplus(W, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    total = cycle_sum(W, walk)
    return MonotonicityReport(n, total <= tol.feas_tol, walk, total, tol.feas_tol, method)


def _rotate_min_first(cycle):
    k = cycle.index(min(cycle))
    return tuple(cycle[k:] + cycle[:k])


def _find_positive_cycle(W, margin):
    """Bellman-Ford on longest paths with arc weights ``W - margin``.

    Returns a positive cycle of the reduced weights, or None.
    """
    m = W.shape[0]
    Wr = W - margin
    dist = np.zeros(m)
    pred = np.full(m, -1)

    def relax_round():
        last = -1
        for i in range(m):
            di = dist[i]
            for j in range(m):
                if i != j and di + Wr[i, j] > dist[j]:
                    dist[j] = di + Wr[i, j]
                    pred[j] = i
                    last = j
        return last

    for _ in range(m - 1):
        if relax_round() < 0:
            return None
    v = relax_round()
    if v < 0:
        return None
    for _ in range(m):
        v = pred[v]
    cycle = [int(v)]
    u = pred[v]
    while u != v:
        cycle.append(int(u))
        u = pred[u]
    cycle.reverse()
    return _rotate_min_first(cycle)


def is_cyclically_monotone(graph, tol=None):
    """Decide cyclic monotonicity by positive-cycle detection.

    Arc weights are lowered by ``feas_tol / m`` so that simple cycles with sum
    at most ``feas_tol`` are not reported.  If the detected cycle is itself
    within tolerance, the verdict falls back to the worst closed walk of
    length at most ``m``.
    """
    tol = tol or Tolerances()
    W = weight_matrix(graph)
    m = W.shape[0]
    cycle = _find_positive_cycle(W, tol.feas_tol / m) if m > 1 else None
    if cycle is None:
        return MonotonicityReport("cyclic", True, (0,), 0.0, tol.feas_tol, "bellman-ford")
    total = cycle_sum(W, cycle)
    if total <= tol.feas_tol:
        best = max((is_n_monotone(graph, k, tol=tol) for k in range(2, m + 1)),
                   key=lambda r: r.worst_sum)
        cycle, total = best.worst_cycle, best.worst_sum
    return MonotonicityReport("cyclic", total <= tol.feas_tol, tuple(cycle), total,
                              tol.feas_tol, "bellman-ford")


class MaxAffineFunction:
    """Convex piecewise-affine ``f(x) = max_k (<slope_k, x> + intercept_k)``."""

    def __init__(self, slopes, intercepts):
        slopes = np.array(slopes, dtype=np.float64)
        if slopes.ndim == 1:
            slopes = slopes.reshape(-1, 1)
        intercepts = np.array(intercepts, dtype=np.float64).reshape(-1)
        if slopes.shape[0] == 0 or slopes.shape[0] != intercepts.shape[0]:
            raise ValueError("need one intercept per slope and at least one piece")
        slopes.setflags(write=False)
        intercepts.setflags(write=False)
        self.slopes = slopes
        self.intercepts = intercepts

    @property
    def dimension(self):
        return self.slopes.shape[1]

    def __len__(self):
        return self.slopes.shape[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim <= 1:
            x = x.reshape(-1)
            return float(np.max(self.slopes @ x + self.intercepts))
        return np.max(x @ self.slopes.T + self.intercepts, axis=1)

    def active_pieces(self, x, atol=1e-12):
        vals = self.slopes @ as_vector(x, "x", self.dimension) + self.intercepts
        return np.flatnonzero(vals >= vals.max() - atol)

    def subgradient(self, x):
        return self.slopes[self.active_pieces(x)[0]].copy()

    def pieces(self):
        return list(zip(self.slopes.copy(), self.intercepts.tolist()))

    def __repr__(self):
        return f"MaxAffineFunction(pieces={len(self)}, d={self.dimension})"


def rockafellar_potential(graph, base_index=0, tol=None):
    """Convex potential whose subdifferential contains the graph.

    With ``pi_j`` the longest-path weight from ``base_index`` to ``j`` in the
    weight-matrix digraph, returns ``f(x) = max_j pi_j + <s_j*, x - s_j>``.
    Then ``f(s_j) = pi_j`` and ``s_j*`` is a subgradient of ``f`` at ``s_j``.
    """
    tol = tol or Tolerances()
    report = is_cyclically_monotone(graph, tol)
    if not report.is_monotone:
        raise NotCyclicallyMonotone(report)
    W = weight_matrix(graph)
    m = W.shape[0]
    if not 0 <= base_index < m:
        raise IndexError(f"base_index {base_index} out of range for {m} pairs")
    pi = np.full(m, -np.inf)
    pi[base_index] = 0.0
    for _ in range(m - 1):
        changed = False
        for i in range(m):
            if pi[i] == -np.inf:
                continue
            for j in range(m):
                if i != j and pi[i] + W[i, j] > pi[j]:
                    pi[j] = pi[i] + W[i, j]
                    changed = True
        if not changed:
            break
    intercepts = pi - np.sum(graph.duals * graph.points, axis=1)
    return MaxAffineFunction(graph.duals, intercepts)


def verify_potential(graph, f, samples, tol=None):
    """Check ``f(y) >= f(s_j) + <s_j*, y - s_j> - feas_tol`` for all j and samples y."""
    tol = tol or Tolerances()
    Y = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if Y.shape[1] != graph.dimension and graph.dimension == 1:
        Y = Y.reshape(-1, 1)
    fy = f(Y)
    fs = f(graph.points)
    # lower[j, k] = f(s_j) + <s_j*, y_k - s_j>
    lower = fs[:, None] + graph.duals @ Y.T - np.sum(graph.duals * graph.points, axis=1)[:, None]
    return bool(np.all(fy[None, :] >= lower - tol.feas_tol))
