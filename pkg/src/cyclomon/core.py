"""Shared numeric types for finite operator graphs in R^d.

Points ``x`` and dual points ``x*`` both live in R^d and are coupled by the
Euclidean pairing.  An operator is represented by its finite graph, a list of
pairs ``(s, s*)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CyclomonError",
    "DimensionError",
    "BudgetExceeded",
    "PreconditionWarning",
    "Tolerances",
    "OperatorGraph",
    "LinearOperator",
    "ExtensionInstance",
    "as_vector",
    "pairing",
    "weight_matrix",
]


class CyclomonError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(CyclomonError, ValueError):
    """Operands live in spaces of different dimension."""


class BudgetExceeded(CyclomonError):
    """An enumeration would exceed the configured work budget."""


class PreconditionWarning(UserWarning):
    """An operation was called on data that violates its documented premise."""


def as_vector(values, name="vector", dim=None):
    """Return ``values`` as a read-only finite float64 1-D array."""
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: non-finite entry")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"{name}: expected length {dim}, got {arr.shape[0]}")
    arr.setflags(write=False)
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Tolerances:
    feas_tol: float = 1e-7
    num_tol: float = 1e-9
    opt_tol: float = 1e-8
    max_iter: int = 500

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not (v > 0) or not np.isfinite(v):
                raise ValueError(f"tolerances.{f.name} must be positive, got {v!r}")
        if int(self.max_iter) != self.max_iter:
            raise ValueError("tolerances.max_iter must be an integer")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class OperatorGraph:
    """Finite graph ``G(S) = {(s_i, s_i*)}`` of a set-valued operator.

    ``points`` holds the ``s_i`` row-wise and ``duals`` the matching ``s_i*``.
    """

    points: np.ndarray
    duals: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=np.float64)
        q = np.array(self.duals, dtype=np.float64)
        if p.ndim == 1:
            p = p.reshape(-1, 1)
        if q.ndim == 1:
            q = q.reshape(-1, 1)
        if p.ndim != 2 or p.shape[0] == 0:
            raise ValueError("graph must contain at least one pair")
        if p.shape != q.shape:
            raise DimensionError(
                f"points have shape {p.shape} but duals have shape {q.shape}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise ValueError("graph: non-finite entry")
        object.__setattr__(self, "points", _frozen(p))
        object.__setattr__(self, "duals", _frozen(q))

    @classmethod
    def from_pairs(cls, pairs):
        """Build a graph from an iterable of ``(s, s_star)`` pairs."""
        pairs = list(pairs)
        if not pairs:
            raise ValueError("graph must contain at least one pair")
        return cls([np.atleast_1d(s) for s, _ in pairs],
                   [np.atleast_1d(t) for _, t in pairs])

    @property
    def dimension(self):
        return self.points.shape[1]

    @property
    def size(self):
        return self.points.shape[0]

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(zip(self.points, self.duals))

    def __eq__(self, other):
        if not isinstance(other, OperatorGraph):
            return NotImplemented
        return (self.points.shape == other.points.shape
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.duals, other.duals))

    def __hash__(self):
        return hash((self.points.tobytes(), self.duals.tobytes()))

    def __repr__(self):
        return f"OperatorGraph(m={self.size}, d={self.dimension})"

    def pairs(self):
        return [(s.copy(), t.copy()) for s, t in self]

    def domain_points(self):
        """Distinct points of ``D(S)`` in first-appearance order."""
        _, idx = np.unique(self.points, axis=0, return_index=True)
        return _frozen(self.points[np.sort(idx)])

    def range_points(self):
        """Distinct points of ``R(S)`` in first-appearance order."""
        _, idx = np.unique(self.duals, axis=0, return_index=True)
        return _frozen(self.duals[np.sort(idx)])

    def with_pair(self, s, s_star):
        s = as_vector(s, "s", self.dimension)
        s_star = as_vector(s_star, "s_star", self.dimension)
        return OperatorGraph(np.vstack([self.points, s]),
                             np.vstack([self.duals, s_star]))

    def normalized(self):
        """Drop repeated pairs.

        Returns the deduplicated graph and a list of warning messages, one
        per dropped pair.  Repeats never change a cyclic sum or a supremum.
        """
        seen = {}
        keep = []
        messages = []
        for i, (s, t) in enumerate(self):
            key = (s.tobytes(), t.tobytes())
            if key in seen:
                messages.append(f"graph pair {i} duplicates pair {seen[key]}; dropped")
            else:
                seen[key] = i
                keep.append(i)
        if len(keep) == self.size:
            return self, messages
        return OperatorGraph(self.points[keep], self.duals[keep]), messages


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Dense linear map ``B: R^d -> R^d``; the adjoint is the transpose."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"B must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("B: non-finite entry")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def zero(cls, d):
        return cls(np.zeros((d, d)))

    @classmethod
    def identity(cls, d, scale=1.0):
        return cls(scale * np.eye(d))

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def adjoint(self):
        return LinearOperator(self.matrix.T)

    @property
    def symmetric_sum(self):
        """``Q = B + B^T``, the Hessian of ``x -> <Bx, x>``."""
        return _frozen(self.matrix + self.matrix.T)

    def __call__(self, x):
        return self.matrix @ np.asarray(x, dtype=np.float64)

    def apply_adjoint(self, x):
        return self.matrix.T @ np.asarray(x, dtype=np.float64)

    def quadratic(self, x):
        x = np.asarray(x, dtype=np.float64)
        return float(x @ (self.matrix @ x))

    def __eq__(self, other):
        if not isinstance(other, LinearOperator):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        return f"LinearOperator({self.matrix.tolist()})"


@dataclass(frozen=True, eq=False)
class ExtensionInstance:
    """Problem data ``(S, n, B, w*)`` of an extension query."""

    graph: OperatorGraph
    n: int
    B: LinearOperator = None
    w_star: np.ndarray = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    warnings: tuple = ()

    def __post_init__(self):
        d = self.graph.dimension
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        B = self.B if self.B is not None else LinearOperator.zero(d)
        if not isinstance(B, LinearOperator):
            B = LinearOperator(B)
        if B.dimension != d:
            raise DimensionError(f"B is {B.dimension}x{B.dimension} but graph dimension is {d}")
        w = np.zeros(d) if self.w_star is None else self.w_star
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "w_star", as_vector(w, "w_star", d))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def dimension(self):
        return self.graph.dimension

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, ExtensionInstance):
            return NotImplemented
        return (self.graph == other.graph and self.n == other.n
                and self.B == other.B
                and np.array_equal(self.w_star, other.w_star)
                and self.tolerances == other.tolerances)


def pairing(x_star, x):
    """Duality pairing ``<x*, x>`` (the dot product on R^d)."""
    a = np.asarray(x_star, dtype=np.float64)
    b = np.asarray(x, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"pairing of shapes {a.shape} and {b.shape}")
    return float(a @ b)


def weight_matrix(graph):
    """Matrix of cyclic-sum summands ``W[i, j] = <s_i*, s_j - s_i>``.

    The diagonal is exactly zero.
    """
    P, D = graph.points, graph.duals
    steps = P[None, :, :] - P[:, None, :]
    W = np.einsum("ik,ijk->ij", D, steps)
    W.setflags(write=False)
    return W
