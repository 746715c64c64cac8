"""Extension of n-monotone graphs by one point ``(x, w* - Bx)``.

Adding ``(x, x*)`` to an n-monotone graph keeps it n-monotone exactly when
``F_{S,n}(x, x*) <= <x*, x>``.  With ``x* = w* - Bx`` this asks for a point
of ``co D(S)`` where

    phi(x) = F_{S,n}(x, w* - Bx) + <Bx, x> - <w*, x>

is nonpositive.  ``phi`` is convex whenever ``B`` is monotone, and is
minimized here by Kelley's cutting-plane method over barycentric weights of
the points of ``D(S)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .conjugate import (NonMonotoneOperator, enumerate_pieces, pairing_dominance_scan)
from .core import CyclomonError, ExtensionInstance, as_vector
from .fitzpatrick import candidate_test, eval_fitz, translate
from .lp import LPError, linprog, minimax_over_simplex
from .monotonicity import MonotonicityReport, is_n_monotone

__all__ = [
    "ExtensionInstance",
    "HypothesisReport",
    "ExtensionResult",
    "IterationLimit",
    "CertificationDiscrepancy",
    "check_hypotheses",
    "solve_extension",
    "certify_extension",
    "phi",
]

log = logging.getLogger(__name__)

CORE_NOTE = ("D(S) is finite and bounded, so its barrier cone is all of R^d and the "
             "core condition holds for every w*")
COERCIVE_NOTE = "in R^d coercive and strongly coercive both mean B + B^T positive definite"


class IterationLimit(CyclomonError):
    """The solver hit ``max_iter`` without reaching ``phi <= feas_tol``."""

    def __init__(self, result):
        super().__init__(
            f"no certified extension after {result.iterations} iterations "
            f"(best phi = {result.phi_value:.3g})")
        self.result = result


class CertificationDiscrepancy(UserWarning):
    """The enlarged-graph check and the Fitzpatrick test disagree."""


@dataclass(frozen=True)
class HypothesisReport:
    graph_n_monotone: bool
    dominance_scan_clean: bool
    dominance_samples: int
    dominance_seed: int
    B_monotone: bool
    B_coercive: bool
    B_strongly_coercive: bool
    condition_graph_feasible: bool
    condition_core_satisfied: bool
    applicable_theorems: tuple
    condition_conjugate_domain: bool | None = None
    min_eigenvalue: float = 0.0
    notes: tuple = ()

    def to_dict(self):
        return {
            "graph_n_monotone": self.graph_n_monotone,
            "dominance_scan_clean": self.dominance_scan_clean,
            "dominance_samples": self.dominance_samples,
            "dominance_seed": self.dominance_seed,
            "B_monotone": self.B_monotone,
            "B_coercive": self.B_coercive,
            "B_strongly_coercive": self.B_strongly_coercive,
            "condition_graph_feasible": self.condition_graph_feasible,
            "condition_core_satisfied": self.condition_core_satisfied,
            "condition_conjugate_domain": self.condition_conjugate_domain,
            "applicable_theorems": list(self.applicable_theorems),
            "min_eigenvalue": self.min_eigenvalue,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["applicable_theorems"] = tuple(data["applicable_theorems"])
        data["notes"] = tuple(data.get("notes", ()))
        return cls(**data)


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    x: np.ndarray
    x_star: np.ndarray
    phi_value: float
    certificate: MonotonicityReport
    iterations: int
    hypothesis: HypothesisReport | None
    weights: np.ndarray
    lower_bound: float = -np.inf
    history: tuple = field(default=(), repr=False)
    warnings: tuple = ()

    @property
    def certified(self):
        return self.certificate.is_monotone

    def to_dict(self):
        return {
            "x": self.x.tolist(),
            "x_star": self.x_star.tolist(),
            "phi_value": self.phi_value,
            "certificate": self.certificate.to_dict(),
            "iterations": self.iterations,
            "hypothesis": None if self.hypothesis is None else self.hypothesis.to_dict(),
            "weights": self.weights.tolist(),
            "lower_bound": self.lower_bound if np.isfinite(self.lower_bound) else None,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data):
        hyp = data.get("hypothesis")
        lb = data.get("lower_bound")
        return cls(
            x=np.array(data["x"], dtype=float),
            x_star=np.array(data["x_star"], dtype=float),
            phi_value=float(data["phi_value"]),
            certificate=MonotonicityReport.from_dict(data["certificate"]),
            iterations=int(data["iterations"]),
            hypothesis=None if hyp is None else HypothesisReport.from_dict(hyp),
            weights=np.array(data["weights"], dtype=float),
            lower_bound=-np.inf if lb is None else float(lb),
            warnings=tuple(data.get("warnings", ())),
        )


def _simplex_feasible(columns, target, tol):
    """Is ``target`` a convex combination of the rows of ``columns``?"""
    k = columns.shape[0]
    A_eq = np.vstack([columns.T, np.ones((1, k))])
    b_eq = np.concatenate([target, [1.0]])
    res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, feas_tol=tol.feas_tol)
    return res.success


def check_hypotheses(instance, num_samples=200, seed=0, use_conjugate_domain=False):
    """Evaluate the hypotheses of the three extension theorems on ``instance``.

    T1 needs B monotone and strongly coercive; T2 needs B monotone, coercive
    and ``w* in co{s_i* - B^T s_i}`` (or, with ``use_conjugate_domain``, the
    same membership over the pieces of ``dom F*``); T3 needs B monotone and
    the core condition.  All three also need the graph n-monotone and
    ``p <= F*``, of which only a sampled falsifier is available.
    """
    tol = instance.tolerances
    graph, n, B, w = instance.graph, instance.n, instance.B, instance.w_star
    notes = [CORE_NOTE, COERCIVE_NOTE]
    graph_ok = is_n_monotone(graph, n, tol=tol).is_monotone
    scan = pairing_dominance_scan(graph, n, num_samples, seed, tol)
    if n >= 3:
        notes.append("p <= F* checked by sampling only; a clean scan is not a proof")
    Q = B.symmetric_sum
    lo = float(np.linalg.eigvalsh(Q).min())
    B_monotone = lo / 2.0 >= -tol.num_tol
    strong = lo > tol.num_tol
    shifted_duals = graph.duals - graph.points @ B.matrix
    graph_feas = _simplex_feasible(shifted_duals, w, tol)
    conj_feas = None
    if use_conjugate_domain:
        pieces = enumerate_pieces(graph, n, prune=True)
        conj_feas = _simplex_feasible(pieces.slope_x - pieces.slope_xstar @ B.matrix, w, tol)
    cond2 = conj_feas if use_conjugate_domain else graph_feas
    base = graph_ok and scan.clean
    applicable = []
    if base and B_monotone and strong:
        applicable.append("T1")
    if base and B_monotone and strong and cond2:
        applicable.append("T2")
    if base and B_monotone:
        applicable.append("T3")
    return HypothesisReport(
        graph_n_monotone=graph_ok,
        dominance_scan_clean=scan.clean,
        dominance_samples=int(num_samples),
        dominance_seed=int(seed),
        B_monotone=B_monotone,
        B_coercive=strong,
        B_strongly_coercive=strong,
        condition_graph_feasible=graph_feas,
        condition_core_satisfied=True,
        applicable_theorems=tuple(applicable),
        condition_conjugate_domain=conj_feas,
        min_eigenvalue=lo,
        notes=tuple(notes),
    )


def phi(graph, n, B, w_star, x):
    """``phi(x)`` and a subgradient of it.

    Returns ``(value, subgradient, chain)``.
    """
    x = np.asarray(x, dtype=np.float64)
    x_star = w_star - B.matrix @ x
    ev = eval_fitz(graph, n, x, x_star)
    value = ev.value + float(x @ B.matrix @ x) - float(w_star @ x)
    grad = ev.slope_x - B.matrix.T @ ev.slope_xstar + B.symmetric_sum @ x - w_star
    return value, grad, ev.argmax_chain


def _project_simplex(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / idx > 0)[-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def solve_extension(instance, minimize=False, translate_first=True, hypothesis=None,
                    check=True):
    """Find ``x in co D(S)`` such that ``(x, w* - Bx)`` extends the graph.

    By default the search stops at the first iterate with
    ``phi <= feas_tol / max(1, n // 2)``.  A walk of length n passes through
    the new pair at most ``n // 2`` times between graph points, each pass
    adding at most ``phi``, so the margin keeps the enlarged-graph
    certificate within ``feas_tol`` as well.  With ``minimize=True`` it runs until the
    cutting-plane gap drops below ``opt_tol``, returning the minimizer of
    ``phi``.  With ``translate_first`` the work is done on ``S - w*`` with
    ``w* = 0``, the same function written differently.

    Raises `IterationLimit` if ``max_iter`` is reached with ``phi > feas_tol``.
    """
    tol = instance.tolerances
    n, B, w_orig = instance.n, instance.B, instance.w_star
    if float(np.linalg.eigvalsh(B.symmetric_sum).min()) < -2.0 * tol.num_tol:
        raise NonMonotoneOperator("phi is convex only for monotone B")
    if translate_first:
        work, w = translate(instance.graph, w_orig), np.zeros_like(w_orig)
    else:
        work, w = instance.graph, w_orig
    notes = []
    if hypothesis is None and check:
        hypothesis = check_hypotheses(instance)
    if hypothesis is not None and not hypothesis.applicable_theorems:
        notes.append("no extension theorem applies; searching anyway")

    target = tol.feas_tol / max(1, n // 2)
    V = instance.graph.domain_points()
    k = V.shape[0]
    lam = np.full(k, 1.0 / k)
    cuts = []
    seen = []
    best = (np.inf, None, None, None)  # phi, lam, x, grad
    history = []
    lower = -np.inf
    it = 0
    converged = False
    while it < tol.max_iter:
        it += 1
        x = lam @ V
        val, g, _ = phi(work, n, B, w, x)
        if val < best[0]:
            best = (val, lam.copy(), x, g)
        history.append((best[0], lam.copy()))
        if not minimize and best[0] <= target:
            break
        cuts.append((val - g @ x) + V @ g)
        seen.append(x)
        try:
            lower, nxt, _ = minimax_over_simplex(np.array(cuts), tol.feas_tol)
        except LPError as exc:
            log.debug("master LP failed: %s", exc)
            nxt = None
        if best[0] - lower <= tol.opt_tol:
            converged = True
            break
        nx = None if nxt is None else nxt @ V
        if nx is None or any(np.max(np.abs(nx - s)) <= 1e-13 for s in seen):
            # degenerate master: projected subgradient step from the best point
            gl = V @ best[3]
            gap = best[0] - lower if np.isfinite(lower) else abs(best[0]) + 1.0
            step = gap / max(float(gl @ gl), 1e-300)
            nxt = _project_simplex(best[1] - step * gl)
        lam = nxt

    phi_best, lam_best, x_best, _ = best
    x_best = np.asarray(x_best, dtype=np.float64)
    x_star = w_orig - B.matrix @ x_best
    certificate = certify_extension(instance, x_best)
    if minimize and not converged:
        notes.append(f"cutting-plane gap not closed after {it} iterations")
    result = ExtensionResult(
        x=x_best, x_star=x_star, phi_value=float(phi_best), certificate=certificate,
        iterations=it, hypothesis=hypothesis, weights=lam_best, lower_bound=float(lower),
        history=tuple(history), warnings=tuple(notes),
    )
    if phi_best > tol.feas_tol and not converged:
        raise IterationLimit(result)
    return result


def certify_extension(instance, x):
    """n-monotonicity report of ``G(S)`` enlarged by ``(x, w* - Bx)``.

    Cross-checked against the Fitzpatrick test; a disagreement is logged and
    issued as a `CertificationDiscrepancy` warning.
    """
    tol = instance.tolerances
    x = as_vector(x, "x", instance.dimension)
    x_star = instance.w_star - instance.B.matrix @ x
    enlarged = instance.graph.with_pair(x, x_star)
    report = is_n_monotone(enlarged, instance.n, tol=tol)
    by_fitz = candidate_test(instance.graph, instance.n, x, x_star, tol, check_graph=False)
    if by_fitz != report.is_monotone:
        msg = (f"enlarged-graph verdict {report.is_monotone} disagrees with Fitzpatrick "
               f"test {by_fitz} (worst sum {report.worst_sum:.3g})")
        log.warning(msg)
        warnings.warn(msg, CertificationDiscrepancy, stacklevel=2)
    return report
