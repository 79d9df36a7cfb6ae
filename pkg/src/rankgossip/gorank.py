"""Asynchronous GoRank: gossip rank estimation by swapping auxiliary observations.

Each node keeps its own observation ``x[k]``, an auxiliary observation
``y[k]`` that random-walks over the graph through swaps, a running mean
``r'[k]`` of the comparisons ``x[k] > y[k]`` it has made, and a counter
``c[k]``. The rank estimate is ``n * r'[k] + 1`` (or ``+ 1/2`` with mid-rank
tie handling).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidInput, InvalidParameter
from .graph import EdgeDistribution, Graph, uniform_edge_distribution


def _as_observations(observations: Sequence[float]) -> list[float]:
    x = [float(v) for v in np.asarray(observations, dtype=float).ravel()]
    if len(x) < 2:
        raise InvalidParameter(f"need at least 2 observations, got {len(x)}")
    if not all(np.isfinite(x)):
        raise InvalidInput("observations must be finite")
    return x


def exact_ranks(observations: Sequence[float], ties: bool = True) -> np.ndarray:
    """Centralized ranks by pairwise comparison.

    Without ties handling, ``r_k = 1 + #{l : x_k > x_l}`` and duplicated
    values are rejected. With it, ``r_k = 1/2 + sum_l (1{x_k > x_l} +
    1{x_k = x_l}/2)``, i.e. mid-ranks.
    """
    x = np.asarray(observations, dtype=float).ravel()
    if x.size == 0:
        raise InvalidParameter("no observations")
    order = np.sort(x)
    below = np.searchsorted(order, x, side="left")
    if ties:
        equal = np.searchsorted(order, x, side="right") - below
        return 0.5 + below + 0.5 * equal
    if np.unique(x).size != x.size:
        raise InvalidInput("duplicated observations; use ties=True")
    return 1.0 + below


def rank_estimates(normalized: np.ndarray, ties: bool) -> np.ndarray:
    r = np.asarray(normalized, dtype=float)
    return r.size * r + (0.5 if ties else 1.0)


class GoRank:
    """Per-node GoRank state.

    Args:
        observations: one real value per node.
        ties: use mid-rank comparisons (``1{x > y} + 1{x = y}/2``). When
            False, duplicated observations are rejected up front because the
            plain comparison is biased under ties.
    """

    def __init__(self, observations: Sequence[float], ties: bool = True):
        x = _as_observations(observations)
        if not ties and len(set(x)) != len(x):
            raise InvalidInput("duplicated observations; use ties=True")
        self.n = len(x)
        self.ties = ties
        self.x = x
        self.y = list(x)
        self.rp = [0.0] * self.n
        self.c = [1] * self.n
        self.offset = 0.5 if ties else 1.0

    def update(self, k: int) -> float:
        """Fold one comparison into node ``k``'s running mean; return its rank estimate."""
        xk = self.x[k]
        yk = self.y[k]
        if xk > yk:
            h = 1.0
        elif self.ties and xk == yk:
            h = 0.5
        else:
            h = 0.0
        ck = self.c[k]
        r = (1.0 - 1.0 / ck) * self.rp[k] + h / ck
        self.rp[k] = r
        self.c[k] = ck + 1
        return self.n * r + self.offset

    def swap(self, i: int, j: int) -> None:
        y = self.y
        y[i], y[j] = y[j], y[i]

    def on_edge(self, i: int, j: int) -> None:
        if i == j:
            raise InvalidParameter("edge endpoints must differ")
        self.update(i)
        self.update(j)
        self.swap(i, j)

    def rank(self, k: int) -> float:
        return self.n * self.rp[k] + self.offset

    @property
    def normalized(self) -> np.ndarray:
        return np.array(self.rp)

    def estimates(self) -> np.ndarray:
        return rank_estimates(self.rp, self.ties)


def sync_variant_distribution(g: Graph) -> EdgeDistribution:
    """Edge law of the synchronous baseline: every edge equally likely."""
    return uniform_edge_distribution(g)
