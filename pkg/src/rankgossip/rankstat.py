"""Gossip estimation of rank statistics ``T = sum_k f(r_k) g(x_k)``.

Every node tracks a weight ``w[k] = n * f(R_k)`` from its current rank
estimate. Whenever the weight moves, the node injects ``(w_new - w_old) *
g(x_k)`` into its running estimate ``z[k]``, and the two endpoints of every
activated edge average their estimates. Averaging preserves ``sum(z)``, so
``mean(z) = (1/n) sum_k w[k] g(x_k)``, which tends to ``T`` as the ranks
converge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, NamedTuple, Optional, Protocol, Sequence

import numpy as np

from .errors import EstimatorFailure, InvalidParameter
from .gorank import GoRank, exact_ranks

_STD_NORMAL = NormalDist()


class Ranker(Protocol):
    n: int
    x: list

    def update(self, k: int) -> float: ...

    def swap(self, i: int, j: int) -> None: ...


@dataclass(frozen=True)
class ScorePair:
    """Rank score ``f`` and observation transform ``g``.

    ``g`` is called as ``g(x, in_first_sample)`` so that two-sample
    statistics can read a node's sample label, which stays attached to the
    node rather than to the value being swapped around.
    """

    f: Callable[[float], float]
    g: Callable[[float, bool], float]
    label: str = "custom"


@dataclass(frozen=True)
class Partition:
    """Membership of each node in the first sample."""

    membership: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.membership, dtype=bool).ravel()
        if b.all() or not b.any():
            raise InvalidParameter("both samples must be non-empty")
        b.setflags(write=False)
        object.__setattr__(self, "membership", b)

    @property
    def n1(self) -> int:
        return int(self.membership.sum())

    @property
    def n2(self) -> int:
        return int(self.membership.size - self.membership.sum())

    @property
    def n(self) -> int:
        return int(self.membership.size)

    def complement(self) -> "Partition":
        return Partition(~self.membership)


def _identity(r: float) -> float:
    return r


def _membership(x: float, first: bool) -> float:
    return 1.0 if first else 0.0


def _value(x: float, first: bool) -> float:
    return x


def wilcoxon_scores(part: Optional[Partition] = None) -> ScorePair:
    """``f = id`` and ``g = 1{node in first sample}``; the rank sum of the first sample."""
    return ScorePair(f=_identity, g=_membership, label="wilcoxon")


@dataclass(frozen=True)
class _VanDerWaerdenScore:
    n: int

    def __call__(self, r: float) -> float:
        r = min(max(r, 1.0), float(self.n))
        return _STD_NORMAL.inv_cdf(r / (self.n + 1))


def vanderwaerden_scores(n: int) -> ScorePair:
    """``f(r) = Phi^{-1}(r / (n + 1))`` with ``r`` clamped to ``[1, n]``."""
    if n < 2:
        raise InvalidParameter(f"n must be >= 2, got {n}")
    return ScorePair(f=_VanDerWaerdenScore(n), g=_membership, label="van-der-waerden")


def l_statistic_scores(f: Callable[[float], float]) -> ScorePair:
    return ScorePair(f=f, g=_value, label="l-statistic")


def _labels(labels, n: int) -> list[bool]:
    if labels is None:
        return [False] * n
    if isinstance(labels, Partition):
        labels = labels.membership
    b = [bool(v) for v in np.asarray(labels).ravel()]
    if len(b) != n:
        raise InvalidParameter(f"{len(b)} labels for {n} observations")
    return b


def centralized_statistic(
    observations: Sequence[float],
    scores: ScorePair,
    labels=None,
    ties: bool = True,
) -> float:
    x = np.asarray(observations, dtype=float).ravel()
    r = exact_ranks(x, ties=ties)
    b = _labels(labels, x.size)
    return float(sum(scores.f(float(rk)) * scores.g(float(xk), bk) for rk, xk, bk in zip(r, x, b)))


class FixedRanks:
    """Ranker that always reports the exact ranks. For checking the averaging layer alone."""

    def __init__(self, observations: Sequence[float], ties: bool = True):
        self.x = [float(v) for v in observations]
        self.n = len(self.x)
        self.r = exact_ranks(self.x, ties=ties).tolist()

    def update(self, k: int) -> float:
        return self.r[k]

    def swap(self, i: int, j: int) -> None:
        pass


class RankStatistic:
    """Gossip estimator of ``sum_k f(r_k) g(x_k)``; each node's output is ``z[k]``.

    Args:
        observations: one value per node.
        scores: the ``(f, g)`` pair.
        labels: per-node first-sample membership (a :class:`Partition` or a
            boolean vector); only read by label-dependent ``g``.
        ties: mid-rank handling in the default ranker.
        ranker: rank estimator to drive; defaults to :class:`GoRank`.
    """

    def __init__(
        self,
        observations: Sequence[float],
        scores: ScorePair,
        labels=None,
        ties: bool = True,
        ranker: Optional[Ranker] = None,
    ):
        self.rank = ranker if ranker is not None else GoRank(observations, ties=ties)
        n = self.rank.n
        b = _labels(labels, n)
        gx = [float(scores.g(xk, bk)) for xk, bk in zip(self.rank.x, b)]
        bad = [k for k, v in enumerate(gx) if not math.isfinite(v)]
        if bad:
            raise EstimatorFailure(f"g is not finite at node {bad[0]}", node=bad[0])
        self.n = n
        self.f = scores.f
        self.gx = gx
        self.z = [0.0] * n
        self.w = [0.0] * n

    def _inject(self, k: int) -> None:
        w_new = self.n * self.f(self.rank.update(k))
        if not math.isfinite(w_new):
            raise EstimatorFailure(f"f returned {w_new} at node {k}", node=k)
        self.z[k] += (w_new - self.w[k]) * self.gx[k]
        self.w[k] = w_new

    def on_edge(self, i: int, j: int) -> None:
        if i == j:
            raise InvalidParameter("edge endpoints must differ")
        self._inject(i)
        self._inject(j)
        z = self.z
        z[i] = z[j] = (z[i] + z[j]) / 2.0
        self.rank.swap(i, j)

    def estimates(self) -> np.ndarray:
        return np.array(self.z)

    def weighted_sum(self) -> float:
        """``sum_k w[k] g(x_k)``; equals ``sum(z)`` up to rounding."""
        return math.fsum(w * g for w, g in zip(self.w, self.gx))


class WilcoxonTest(NamedTuple):
    z: float
    p: float


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def wilcoxon_test(t_n: float, n1: int, n2: int) -> WilcoxonTest:
    """Two-sided rank-sum test under the normal approximation, no tie correction.

    ``mu = n1 (n + 1) / 2``, ``sigma = sqrt(n1 n2 (n + 1) / 12)`` with
    ``n = n1 + n2``; the p-value is ``2 (1 - Phi(|z|))``.
    """
    if n1 < 1 or n2 < 1:
        raise InvalidParameter(f"sample sizes must be >= 1, got n1={n1}, n2={n2}")
    n = n1 + n2
    mu = n1 * (n + 1) / 2.0
    sigma = math.sqrt(n1 * n2 * (n + 1) / 12.0)
    z = (t_n - mu) / sigma
    # erfc form of 2(1 - Phi(|z|)) keeps precision in the tail.
    return WilcoxonTest(z=z, p=math.erfc(abs(z) / math.sqrt(2.0)))
