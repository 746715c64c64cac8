"""Dense two-phase simplex method with Bland's anti-cycling rule.

Solves ``min c^T z  s.t.  A_ub z <= b_ub,  A_eq z = b_eq,  z >= 0`` on small
dense problems.  Used internally for conjugate evaluation, feasibility tests
and cutting-plane master problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CyclomonError

__all__ = ["LPError", "LPResult", "linprog", "minimax_over_simplex"]

_PIVOT_TOL = 1e-11
_COST_TOL = 1e-11


class LPError(CyclomonError):
    """The simplex method could not finish (pivot limit or breakdown)."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray | None
    fun: float
    residual: float
    pivots: int

    @property
    def success(self):
        return self.status == "optimal"


class _Tableau:
    def __init__(self, T, basis, max_pivots):
        self.T = T
        self.basis = basis
        self.max_pivots = max_pivots
        self.pivots = 0
        self.trace = []

    def pivot(self, r, c):
        T = self.T
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = c
        self.pivots += 1
        if len(self.trace) < 200:
            self.trace.append((r, c))

    def run(self, ncols):
        """Pivot to optimality over the first ``ncols`` columns.

        Returns False if the problem is unbounded along some column.
        """
        T = self.T
        while True:
            if self.pivots >= self.max_pivots:
                raise LPError(f"simplex pivot limit {self.max_pivots} reached", self.trace)
            cost = T[-1, :ncols]
            candidates = np.flatnonzero(cost < -_COST_TOL)
            if candidates.size == 0:
                return True
            c = int(candidates[0])
            column = T[:-1, c]
            rows = np.flatnonzero(column > _PIVOT_TOL)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            r = int(min(tied, key=lambda i: self.basis[i]))
            self.pivot(r, c)


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, feas_tol=1e-7,
            max_pivots=None):
    """Minimize ``c @ z`` over ``z >= 0`` subject to the given constraints.

    Infeasibility is reported through ``status`` (when the phase-one point
    misses the constraints by more than ``feas_tol`` in the max-norm), not
    raised.  Raises `LPError` only if the pivot limit is hit.
    """
    c = np.asarray(c, dtype=np.float64).ravel()
    nvar = c.size
    A_ub = np.zeros((0, nvar)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float).ravel()
    A_eq = np.zeros((0, nvar)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    if A_ub.shape[1] != nvar or A_eq.shape[1] != nvar:
        raise ValueError("constraint matrices do not match the cost vector")
    if b_ub.size != m_ub or b_eq.size != m_eq:
        raise ValueError("right-hand sides do not match the constraint matrices")

    rows = m_ub + m_eq
    A = np.zeros((rows, nvar + m_ub))
    A[:m_ub, :nvar] = A_ub
    A[:m_ub, nvar:] = np.eye(m_ub)
    A[m_ub:, :nvar] = A_eq
    b = np.concatenate([b_ub, b_eq])
    A_orig, b_orig = A.copy(), b.copy()
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    nstruct = nvar + m_ub
    basis = [-1] * rows
    need_art = []
    for i in range(rows):
        if i < m_ub and not flip[i]:
            basis[i] = nvar + i
        else:
            need_art.append(i)
    nart = len(need_art)
    ncols = nstruct + nart
    T = np.zeros((rows + 1, ncols + 1))
    T[:rows, :nstruct] = A
    T[:rows, -1] = b
    for k, i in enumerate(need_art):
        T[i, nstruct + k] = 1.0
        basis[i] = nstruct + k
    # phase-one objective: sum of artificials, priced out against the basis
    for i in need_art:
        T[-1] -= T[i]
    T[-1, nstruct:ncols] = 0.0

    if max_pivots is None:
        max_pivots = 50 * (rows + ncols) + 1000
    tab = _Tableau(T, basis, max_pivots)
    if nart:
        tab.run(ncols)

    z = np.zeros(ncols)
    for i, j in enumerate(tab.basis):
        z[j] = tab.T[i, -1]
    residual = float(np.max(np.abs(A_orig @ z[:nstruct] - b_orig), initial=0.0))
    if residual > feas_tol:
        return LPResult("infeasible", None, np.inf, residual, tab.pivots)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for i in range(rows):
        if tab.basis[i] >= nstruct:
            row = tab.T[i, :nstruct]
            nz = np.flatnonzero(np.abs(row) > 1e-9)
            if nz.size:
                tab.pivot(i, int(nz[0]))
                keep.append(i)
        else:
            keep.append(i)
    T = np.vstack([tab.T[keep][:, list(range(nstruct)) + [ncols]], np.zeros((1, nstruct + 1))])
    basis = [tab.basis[i] for i in keep]
    cfull = np.concatenate([c, np.zeros(m_ub)])
    T[-1, :nstruct] = cfull
    for i, j in enumerate(basis):
        T[-1] -= cfull[j] * T[i]
    tab2 = _Tableau(T, basis, max_pivots)
    tab2.pivots = tab.pivots
    tab2.trace = tab.trace
    if not tab2.run(nstruct):
        return LPResult("unbounded", None, -np.inf, residual, tab2.pivots)

    z = np.zeros(nstruct)
    for i, j in enumerate(tab2.basis):
        z[j] = tab2.T[i, -1]
    z = np.maximum(z, 0.0)
    x = z[:nvar]
    residual = float(np.max(np.abs(A_orig @ z - b_orig), initial=0.0))
    return LPResult("optimal", x, float(c @ x), residual, tab2.pivots)


def minimax_over_simplex(G, feas_tol=1e-7):
    """Solve ``min_{mu in simplex} max_j (G @ mu)_j`` as a linear program.

    Returns ``(value, mu, result)``.  Each row is shifted by its minimum so
    that the slack basis is feasible and only the simplex row needs phase one.
    """
    G = np.atleast_2d(np.asarray(G, dtype=np.float64))
    J, K = G.shape
    lo = G.min(axis=1)
    Gs = G - lo[:, None]
    top = float(G.max())
    # variables (mu, tau); t = top - tau
    A_ub = np.hstack([Gs, np.ones((J, 1))])
    b_ub = top - lo
    A_eq = np.hstack([np.ones((1, K)), np.zeros((1, 1))])
    c = np.zeros(K + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub, b_ub, A_eq, [1.0], feas_tol=feas_tol)
    if not res.success:
        raise LPError(f"minimax master LP ended with status {res.status}")
    mu = np.maximum(res.x[:K], 0.0)
    mu /= mu.sum()
    return float(np.max(G @ mu)), mu, res
