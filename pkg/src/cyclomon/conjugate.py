"""Fenchel conjugates of Fitzpatrick functions and the related checks.

On a finite graph ``F_{S,n}(x, x*) = max_k <a_k, x> + <b_k, x*> + c_k`` with
one affine piece per chain, so its conjugate is the linear program

    F*(x*, x) = min { sum_k mu_k (-c_k) : sum mu_k a_k = x*, sum mu_k b_k = x,
                      mu in the unit simplex }

and equals ``+inf`` when the program is infeasible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import (BudgetExceeded, CyclomonError, LinearOperator, Tolerances,
                   as_vector, weight_matrix)
from .lp import linprog, minimax_over_simplex

__all__ = [
    "AffinePieceSet",
    "ConjugateValue",
    "DominanceScan",
    "SandwichReport",
    "GapReport",
    "NonMonotoneOperator",
    "PIECE_BUDGET",
    "enumerate_pieces",
    "eval_conjugate",
    "pairing_dominance_scan",
    "domain_sandwich_check",
    "eval_f_star",
    "f_star_direct",
    "duality_gap_report",
]

PIECE_BUDGET = 10**5


class NonMonotoneOperator(CyclomonError, ValueError):
    """``B + B^T`` has a negative eigenvalue."""


@dataclass(frozen=True, eq=False)
class AffinePieceSet:
    """Max-affine form of ``F_{S,n}``.

    Piece ``k`` is ``(x, x*) -> <slope_x[k], x> + <slope_xstar[k], x*> + intercept[k]``
    and comes from ``chains[k]``.
    """

    slope_x: np.ndarray
    slope_xstar: np.ndarray
    intercept: np.ndarray
    chains: np.ndarray
    n: int

    def __len__(self):
        return self.intercept.shape[0]

    def __call__(self, x, x_star):
        return float(np.max(self.slope_x @ np.asarray(x, float)
                            + self.slope_xstar @ np.asarray(x_star, float) + self.intercept))

    def pruned(self):
        """Keep, for each distinct slope pair, only the piece with the largest intercept."""
        key = np.hstack([self.slope_x, self.slope_xstar])
        order = np.lexsort((np.arange(len(self)), -self.intercept))
        _, first = np.unique(key[order], axis=0, return_index=True)
        keep = np.sort(order[first])
        return AffinePieceSet(self.slope_x[keep], self.slope_xstar[keep],
                              self.intercept[keep], self.chains[keep], self.n)

    def as_tuples(self):
        return [(a.copy(), b.copy(), float(c))
                for a, b, c in zip(self.slope_x, self.slope_xstar, self.intercept)]


def enumerate_pieces(graph, n, prune=False, budget=PIECE_BUDGET):
    """One affine piece of ``F_{S,n}`` per chain in ``G(S)^(n-1)``."""
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    m, k = graph.size, n - 1
    if m**k > budget:
        raise BudgetExceeded(f"{m}^{k} = {m**k} pieces exceed the budget {budget}")
    W = weight_matrix(graph)
    chains = np.array(list(itertools.product(range(m), repeat=k)), dtype=np.intp)
    c = np.zeros(chains.shape[0])
    for t in range(k - 1):
        c = c + W[chains[:, t], chains[:, t + 1]]
    last = chains[:, -1]
    c = c - np.sum(graph.duals[last] * graph.points[last], axis=1)
    pieces = AffinePieceSet(graph.duals[last], graph.points[chains[:, 0]], c, chains, n)
    return pieces.pruned() if prune else pieces


@dataclass(frozen=True)
class ConjugateValue:
    value: float
    weights: np.ndarray | None = None
    pieces: AffinePieceSet | None = field(default=None, repr=False)
    residual: float = 0.0
    pivots: int = 0

    @property
    def finite(self):
        return np.isfinite(self.value)


def _conjugate_lp(pieces, x_star, x, tol):
    A_eq = np.vstack([pieces.slope_x.T, pieces.slope_xstar.T, np.ones((1, len(pieces)))])
    b_eq = np.concatenate([x_star, x, [1.0]])
    res = linprog(-pieces.intercept, A_eq=A_eq, b_eq=b_eq, feas_tol=tol.feas_tol)
    if res.status == "infeasible":
        return ConjugateValue(np.inf, None, pieces, res.residual, res.pivots)
    if not res.success:
        raise CyclomonError(f"conjugate LP ended with status {res.status}")
    return ConjugateValue(res.fun, res.x, pieces, res.residual, res.pivots)


def eval_conjugate(graph, n, x_star, x, tol=None, pieces=None):
    """``F*_{S,n}(x*, x)`` with the optimal piece weights as certificate."""
    tol = tol or Tolerances()
    d = graph.dimension
    x_star = as_vector(x_star, "x_star", d)
    x = as_vector(x, "x", d)
    if pieces is None:
        pieces = enumerate_pieces(graph, n, prune=True)
    return _conjugate_lp(pieces, x_star, x, tol)


def _dirichlet(rng, k, size):
    return rng.dirichlet(np.ones(k), size=size)


@dataclass
class DominanceScan:
    n: int
    num_samples: int
    seed: int
    violations: list

    @property
    def clean(self):
        return not self.violations

    def to_dict(self):
        return {
            "n": self.n,
            "num_samples": self.num_samples,
            "seed": self.seed,
            "clean": self.clean,
            "violations": [
                {"x_star": v[0].tolist(), "x": v[1].tolist(), "pairing": v[2], "conjugate": v[3]}
                for v in self.violations
            ],
            "note": "sampled falsifier of p <= F*; an empty list is not a proof",
        }


def pairing_dominance_scan(graph, n, num_samples=1000, seed=0, tol=None):
    """Search ``dom F*`` for points where ``<x*, x> > F*(x*, x) + feas_tol``.

    Points are Dirichlet mixtures of the piece slopes, so every sample has a
    finite conjugate.  Returns the violations found; none found proves nothing.
    """
    tol = tol or Tolerances()
    pieces = enumerate_pieces(graph, n, prune=True)
    rng = np.random.default_rng(seed)
    weights = _dirichlet(rng, len(pieces), num_samples)
    violations = []
    for lam in weights:
        x_star = lam @ pieces.slope_x
        x = lam @ pieces.slope_xstar
        cv = _conjugate_lp(pieces, x_star, x, tol)
        p = float(x_star @ x)
        if p > cv.value + tol.feas_tol:
            violations.append((x_star, x, p, cv.value))
    return DominanceScan(int(n), int(num_samples), int(seed), violations)


@dataclass
class SandwichReport:
    n: int
    num_samples: int
    seed: int
    failures: list
    inclusion: str

    @property
    def holds(self):
        return not self.failures

    def to_dict(self):
        return {
            "n": self.n,
            "num_samples": self.num_samples,
            "seed": self.seed,
            "inclusion": self.inclusion,
            "holds": self.holds,
            "failures": [{"x": u.tolist(), "x_star": v.tolist()} for u, v in self.failures],
        }


def domain_sandwich_check(graph, n, num_samples=500, seed=0, tol=None):
    """Sample the inner bound of ``dom F*^T`` and check the conjugate is finite there.

    For ``n == 2`` the samples are points of ``co G(S)``; for ``n >= 3`` they
    are pairs from ``co D(S) x co R(S)`` drawn independently.
    """
    tol = tol or Tolerances()
    n = int(n)
    pieces = enumerate_pieces(graph, n, prune=True)
    rng = np.random.default_rng(seed)
    failures = []
    if n == 2:
        lam = _dirichlet(rng, graph.size, num_samples)
        us, vs = lam @ graph.points, lam @ graph.duals
        inclusion = "co G(S) in dom F*^T"
    else:
        D, R = graph.domain_points(), graph.range_points()
        us = _dirichlet(rng, D.shape[0], num_samples) @ D
        vs = _dirichlet(rng, R.shape[0], num_samples) @ R
        inclusion = "co D(S) x co R(S) in dom F*^T"
    for u, v in zip(us, vs):
        if not _conjugate_lp(pieces, v, u, tol).finite:
            failures.append((u, v))
    return SandwichReport(n, int(num_samples), int(seed), failures, inclusion)


def _check_monotone(B, tol):
    Bs = 0.5 * B.symmetric_sum
    lo = float(np.linalg.eigvalsh(Bs).min())
    if lo < -tol.num_tol:
        raise NonMonotoneOperator(f"B is not monotone: min eigenvalue of (B+B^T)/2 is {lo:.3g}")


def _simplex_qp(H, r, max_iter=2000):
    """Minimize ``l^T H l - r^T l`` over the unit simplex (H symmetric PSD).

    Pairwise Frank-Wolfe with exact line search, alternated with a solve of
    the optimality system on the current face.
    """
    k = r.shape[0]
    obj = lambda l: float(l @ H @ l - r @ l)
    lam = np.zeros(k)
    lam[int(np.argmax(r - np.diag(H)))] = 1.0
    scale = 1.0 + np.abs(H).max() + np.abs(r).max()
    for _ in range(max_iter):
        grad = 2.0 * H @ lam - r
        support = np.flatnonzero(lam > 0)
        s = int(np.argmin(grad))
        a = int(support[np.argmax(grad[support])])
        if grad[a] - grad[s] <= 1e-14 * scale:
            break
        direction = np.zeros(k)
        direction[s] += 1.0
        direction[a] -= 1.0
        slope = float(grad @ direction)
        curv = float(direction @ H @ direction)
        gmax = lam[a]
        step = gmax if curv <= 0 else min(gmax, -slope / (2.0 * curv))
        lam = lam + step * direction
        lam[a] = 0.0 if step == gmax else lam[a]
        lam = np.maximum(lam, 0.0)
        lam /= lam.sum()
        # face polish
        J = np.flatnonzero(lam > 1e-13)
        K = np.zeros((J.size + 1, J.size + 1))
        K[:-1, :-1] = 2.0 * H[np.ix_(J, J)]
        K[:-1, -1] = 1.0
        K[-1, :-1] = 1.0
        rhs = np.concatenate([r[J], [1.0]])
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0][:-1]
        if np.all(sol >= 0) and abs(sol.sum() - 1.0) < 1e-12:
            cand = np.zeros(k)
            cand[J] = sol
            if obj(cand) <= obj(lam):
                lam = cand
    return lam


def f_star_direct(graph, B, y_star):
    """Direct ``f*(y*) = max_{x in co D(S)} <y*, x> - <Bx, x>``.

    Returns ``(value, maximizer, vertex_weights)``.
    """
    V = graph.domain_points()
    Bs = 0.5 * B.symmetric_sum
    H = V @ Bs @ V.T
    H = 0.5 * (H + H.T)
    r = V @ y_star
    lam = _simplex_qp(H, r)
    x = lam @ V
    return float(y_star @ x - x @ B.matrix @ x), x, lam


def _f_star_infconv(graph, B, y_star, tol):
    """``inf_u h*(u) + sigma_C(y* - u)`` with ``h(x) = <Bx, x>``.

    ``h*(u) = 1/2 u^T Q^+ u`` on the range of ``Q = B + B^T`` (``+inf`` off it),
    so the infimum runs over ``u = Q z``.
    """
    V = graph.domain_points()
    Q = B.symmetric_sum
    sigma = lambda v: float(np.max(V @ v))
    if np.abs(Q).max() <= tol.num_tol:
        return sigma(y_star)
    d = graph.dimension
    consts = V @ y_star
    QV = V @ Q
    z0 = np.zeros(d)
    t0 = float(consts.max())
    cons = {
        "type": "ineq",
        "fun": lambda v: v[-1] - (consts - QV @ v[:-1]),
        "jac": lambda v: np.hstack([QV, np.ones((V.shape[0], 1))]),
    }
    res = minimize(lambda v: 0.5 * v[:-1] @ Q @ v[:-1] + v[-1],
                   np.concatenate([z0, [t0]]),
                   jac=lambda v: np.concatenate([Q @ v[:-1], [1.0]]),
                   constraints=[cons], method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 500})
    z = res.x[:-1]
    u = Q @ z
    return 0.5 * float(z @ Q @ z) + sigma(y_star - u)


def eval_f_star(graph, B, y_star, method="direct", tol=None):
    """Conjugate of ``f(x) = <Bx, x> + indicator of co D(S)``.

    ``method="direct"`` maximizes the concave quadratic over the polytope;
    ``"infconv"`` evaluates the infimal convolution of ``h*`` and the support
    function of ``co D(S)``.
    """
    tol = tol or Tolerances()
    if not isinstance(B, LinearOperator):
        B = LinearOperator(B)
    y_star = as_vector(y_star, "y_star", graph.dimension)
    _check_monotone(B, tol)
    if method == "direct":
        return f_star_direct(graph, B, y_star)[0]
    if method == "infconv":
        return _f_star_infconv(graph, B, y_star, tol)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class GapReport:
    dual_optimum: float
    primal_infimum: float
    gap: float
    dual_point: np.ndarray
    primal_point: tuple
    pointwise_min: float
    pointwise_violations: int
    num_samples: int
    seed: int
    iterations: int

    def to_dict(self):
        return {
            "dual_optimum": self.dual_optimum,
            "primal_infimum": self.primal_infimum,
            "gap": self.gap,
            "dual_point": self.dual_point.tolist(),
            "primal_point": {"x_star": self.primal_point[0].tolist(),
                             "x": self.primal_point[1].tolist()},
            "pointwise_min": self.pointwise_min,
            "pointwise_violations": self.pointwise_violations,
            "num_samples": self.num_samples,
            "seed": self.seed,
            "iterations": self.iterations,
        }


def _primal_infimum(pieces, graph, B, tol, rng, grid=64, max_iter=300):
    """``min_mu F*-bound(mu) + f*(B^T x(mu) - x*(mu))`` over piece weights mu.

    Kelley cuts come from maximizers ``y in co D(S)`` of ``f*``; upper bounds
    from exact evaluation at the master's iterates.
    """
    K = len(pieces)
    negc = -pieces.intercept
    # column k of the cut: -c_k + <B^T b_k - a_k, y> - <By, y>
    dirs = pieces.slope_xstar @ B.matrix - pieces.slope_x

    def upper(mu):
        v = mu @ dirs
        val, y, _ = f_star_direct(graph, B, v)
        return float(mu @ negc) + val, y

    def cut(y):
        return negc + dirs @ y - float(y @ B.matrix @ y)

    cuts = [cut(y) for y in graph.domain_points()]
    best, best_mu = np.inf, None
    for mu in np.vstack([np.eye(K), _dirichlet(rng, K, grid)]):
        val, y = upper(mu)
        cuts.append(cut(y))
        if val < best:
            best, best_mu = val, mu
    it = 0
    for it in range(1, max_iter + 1):
        lower, mu, _ = minimax_over_simplex(np.array(cuts), tol.feas_tol)
        val, y = upper(mu)
        if val < best:
            best, best_mu = val, mu
        cuts.append(cut(y))
        if best - lower <= 0.1 * tol.opt_tol:
            break
    return best, best_mu, it


def duality_gap_report(instance, num_samples=200, seed=0):
    """Compare both sides of the Fenchel duality behind the extension theorems.

    The dual side is ``-min phi`` from the extension solver.  The primal side
    minimizes ``F*_{S',n}(x*, x) + f*(B^T x - x*)`` for the translated graph
    ``S' = S - w*``.  The pointwise inequality is spot-checked at ``num_samples``
    Dirichlet points of ``dom F*``.
    """
    from .extension import solve_extension
    from .fitzpatrick import translate

    tol = instance.tolerances
    B = instance.B
    _check_monotone(B, tol)
    shifted = translate(instance.graph, instance.w_star)
    result = solve_extension(instance, minimize=True)
    dual = -result.phi_value
    pieces = enumerate_pieces(shifted, instance.n, prune=True)
    rng = np.random.default_rng(seed)
    primal, mu, iters = _primal_infimum(pieces, shifted, B, tol, rng)
    primal_point = (mu @ pieces.slope_x, mu @ pieces.slope_xstar)

    lows = []
    for lam in _dirichlet(rng, len(pieces), num_samples):
        x_star, x = lam @ pieces.slope_x, lam @ pieces.slope_xstar
        cv = _conjugate_lp(pieces, x_star, x, tol)
        if cv.finite:
            lows.append(cv.value + f_star_direct(shifted, B, B.apply_adjoint(x) - x_star)[0])
    lows = np.array(lows)
    return GapReport(dual, primal, abs(dual - primal), result.x, primal_point,
                     float(lows.min()) if lows.size else np.inf,
                     int(np.sum(lows < -tol.feas_tol)), int(num_samples), int(seed),
                     result.iterations + iters)
