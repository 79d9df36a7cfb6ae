"""GoTrim: gossip estimation of the trimmed mean, with the adaptive read-out.

The trimmed mean is the L-statistic ``(1/n) sum_k w(r_k) x_k`` with
``w(r) = n / (n - 2m)`` for ranks strictly inside ``(m + 1/2, n - m + 1/2)``
and 0 otherwise, where ``m = floor(alpha * n)``. Nodes run the same
inject-then-average scheme as :class:`~rankgossip.rankstat.RankStatistic`
twice: once for ``w * x`` (the ``num`` stream) and once for ``w`` alone (the
``mass`` stream). The original read-out is ``num[k]``; the adaptive one is
``num[k] / max(1, mass[k])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameter
from .gorank import GoRank
from .rankstat import Ranker


@dataclass(frozen=True)
class TrimParams:
    alpha: float
    n: int

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise InvalidParameter(f"alpha must be in [0, 1/2), got {self.alpha}")
        if self.n < 2:
            raise InvalidParameter(f"n must be >= 2, got {self.n}")
        if self.n - 2 * self.m < 1:
            raise InvalidParameter(f"alpha={self.alpha} trims every observation for n={self.n}")

    @property
    def m(self) -> int:
        return math.floor(self.alpha * self.n)

    @property
    def lower(self) -> float:
        return self.m + 0.5

    @property
    def upper(self) -> float:
        return self.n - self.m + 0.5

    @property
    def normalizer(self) -> float:
        """Fraction of observations kept, ``(n - 2m) / n``."""
        return (self.n - 2 * self.m) / self.n

    @property
    def weight(self) -> float:
        """Weight of a kept observation."""
        return self.n / (self.n - 2 * self.m)


def trim_weight(r: float, params: TrimParams) -> float:
    return params.weight if params.lower < r < params.upper else 0.0


def gamma_diagnostic(r: float, params: TrimParams) -> float:
    """Distance from rank ``r`` to the nearest endpoint of the inclusion interval."""
    return min(abs(r - params.lower), abs(r - params.upper))


def centralized_trimmed_mean(observations: Sequence[float], alpha: float) -> float:
    x = np.sort(np.asarray(observations, dtype=float).ravel())
    if x.size == 0:
        raise InvalidParameter("no observations")
    if not 0.0 <= alpha < 0.5:
        raise InvalidParameter(f"alpha must be in [0, 1/2), got {alpha}")
    m = math.floor(alpha * x.size)
    return float(x[m : x.size - m].mean())


class GoTrim:
    """Per-node GoTrim state.

    Args:
        observations: one value per node.
        alpha: trimming level; ``floor(alpha * n)`` values are cut at each end.
        ties: mid-rank handling in the default ranker.
        ranker: rank estimator to drive; defaults to :class:`GoRank`.
    """

    def __init__(
        self,
        observations: Sequence[float],
        alpha: float,
        ties: bool = True,
        ranker: Optional[Ranker] = None,
    ):
        self.rank = ranker if ranker is not None else GoRank(observations, ties=ties)
        n = self.rank.n
        self.params = TrimParams(alpha, n)
        self.n = n
        self.num = [0.0] * n
        self.mass = [0.0] * n
        self.w = [0.0] * n

    def _inject(self, k: int) -> None:
        r = self.rank.update(k)
        p = self.params
        w_new = p.weight if p.lower < r < p.upper else 0.0
        delta = w_new - self.w[k]
        if delta:
            self.num[k] += delta * self.rank.x[k]
            self.mass[k] += delta
            self.w[k] = w_new

    def on_edge(self, i: int, j: int) -> None:
        if i == j:
            raise InvalidParameter("edge endpoints must differ")
        self._inject(i)
        self._inject(j)
        num, mass = self.num, self.mass
        num[i] = num[j] = (num[i] + num[j]) / 2.0
        mass[i] = mass[j] = (mass[i] + mass[j]) / 2.0
        self.rank.swap(i, j)

    def original(self) -> np.ndarray:
        return np.array(self.num)

    def adaptive(self) -> np.ndarray:
        return np.array(self.num) / np.maximum(1.0, np.array(self.mass))

    def estimates(self, adaptive: bool = True) -> np.ndarray:
        return self.adaptive() if adaptive else self.original()
