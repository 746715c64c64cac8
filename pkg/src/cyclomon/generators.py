"""Seeded random instances for property tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .core import ExtensionInstance, LinearOperator, OperatorGraph, Tolerances

__all__ = [
    "random_cyclic_graph",
    "random_monotone_graph",
    "random_graph",
    "random_pd_operator",
    "random_instance",
]


def random_cyclic_graph(rng, m, d, pieces=None):
    """Subgradient samples of a random max-affine convex function.

    Such graphs are cyclically monotone by construction.
    """
    pieces = pieces or max(2, m)
    slopes = rng.normal(size=(pieces, d))
    offsets = rng.normal(size=pieces)
    points = rng.uniform(-1.0, 1.0, size=(m, d))
    active = np.argmax(points @ slopes.T + offsets, axis=1)
    return OperatorGraph(points, slopes[active])


def random_monotone_graph(rng, m, d):
    """Samples of a random monotone linear map ``x -> (P + K) x + c``.

    ``P`` is positive semidefinite and ``K`` skew, so the graph is 2-monotone
    but in general not 3-monotone.
    """
    A = rng.normal(size=(d, d))
    P = A @ A.T * rng.uniform(0.0, 1.0)
    S = rng.normal(size=(d, d))
    K = (S - S.T) * rng.uniform(0.0, 2.0)
    c = rng.normal(size=d)
    points = rng.uniform(-1.0, 1.0, size=(m, d))
    return OperatorGraph(points, points @ (P + K).T + c)


def random_graph(rng, m, d):
    """Unstructured Gaussian graph (usually not monotone)."""
    return OperatorGraph(rng.normal(size=(m, d)), rng.normal(size=(m, d)))


def random_pd_operator(rng, d, skew=1.0):
    """Random ``B`` with ``B + B^T`` positive definite."""
    A = rng.normal(size=(d, d))
    S = rng.normal(size=(d, d))
    return LinearOperator(0.5 * (A @ A.T) + 0.1 * np.eye(d) + skew * 0.5 * (S - S.T))


def random_instance(rng, m, d, n, tolerances=None):
    graph = random_cyclic_graph(rng, m, d)
    return ExtensionInstance(graph, n, random_pd_operator(rng, d), rng.normal(size=d),
                             tolerances or Tolerances())
