"""Asynchronous gossip simulation loop.

One tick is one edge activation. Edges are drawn i.i.d. from an
:class:`~rankgossip.graph.EdgeDistribution` by inverse-CDF lookup and handed
to an estimator's ``on_edge``. Metrics are sampled every ``record_every``
ticks and at the final tick.

Trial ``t`` of a run seeded with ``base_seed`` draws all of its randomness
(data placement and edge sequence) from
``numpy.random.Generator(PCG64(SeedSequence([base_seed, t])))``, so a trial
can be reproduced in isolation and trials can run in any order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence, Union

import numpy as np

from .errors import EstimatorFailure, InvalidParameter
from .graph import EdgeDistribution, Graph

log = logging.getLogger(__name__)

MetricFn = Callable[["Estimator"], float]
Metrics = Union[MetricFn, Mapping[str, MetricFn]]


class Estimator(Protocol):
    def on_edge(self, i: int, j: int) -> None: ...

    def estimates(self) -> np.ndarray: ...


def rng_stream(base_seed: int, trial: int = 0) -> np.random.Generator:
    """Independent generator for ``(base_seed, trial)``."""
    if base_seed < 0 or trial < 0:
        raise InvalidParameter("seeds and trial indices must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([base_seed, trial])))


class EdgeSampler:
    """Draws edges from a fixed distribution using a cumulative table."""

    def __init__(self, g: Graph, dist: EdgeDistribution, rng: np.random.Generator):
        if len(dist) != g.num_edges:
            raise InvalidParameter("distribution is not aligned with the graph edges")
        self.edges = g.edge_array
        self.cdf = np.cumsum(dist.probabilities)
        self.cdf[-1] = 1.0
        self.rng = rng

    def draw_indices(self, size: int) -> np.ndarray:
        u = self.rng.random(size)
        idx = np.searchsorted(self.cdf, u, side="right")
        return np.minimum(idx, len(self.cdf) - 1)

    def draw(self, size: int) -> tuple[list[int], list[int]]:
        """Endpoints of ``size`` consecutive draws as two python lists."""
        e = self.edges[self.draw_indices(size)]
        return e[:, 0].tolist(), e[:, 1].tolist()


def draw_edge(g: Graph, dist: EdgeDistribution, rng: np.random.Generator) -> tuple[int, int]:
    i, j = EdgeSampler(g, dist, rng).draw(1)
    return i[0], j[0]


@dataclass
class Trace:
    """Metric snapshots of one or more simulation runs.

    Attributes:
        ticks: recorded tick indices, strictly increasing.
        values: raw snapshots with shape ``(trials, len(ticks), len(columns))``.
        columns: metric names, in the order of the last axis of ``values``.
    """

    ticks: np.ndarray
    values: np.ndarray
    columns: tuple[str, ...] = ("error",)
    meta: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return self.values.shape[0]

    def column(self, name: str | None = None) -> np.ndarray:
        """Raw ``(trials, points)`` values for one metric (the first by default)."""
        k = 0 if name is None else self.columns.index(name)
        return self.values[:, :, k]

    def mean(self, name: str | None = None) -> np.ndarray:
        return self.column(name).mean(axis=0)

    def std(self, name: str | None = None) -> np.ndarray:
        v = self.column(name)
        if v.shape[0] < 2:
            return np.zeros(v.shape[1])
        return v.std(axis=0, ddof=1)

    def final(self, name: str | None = None) -> np.ndarray:
        """Per-trial value at the last recorded tick."""
        return self.column(name)[:, -1]

    @classmethod
    def stack(cls, traces: Sequence["Trace"]) -> "Trace":
        if not traces:
            raise InvalidParameter("nothing to aggregate")
        first = traces[0]
        for tr in traces[1:]:
            if tr.columns != first.columns or not np.array_equal(tr.ticks, first.ticks):
                raise InvalidParameter("traces have different ticks or columns")
        return cls(
            ticks=first.ticks.copy(),
            values=np.concatenate([tr.values for tr in traces], axis=0),
            columns=first.columns,
        )


def _normalize_metrics(metric: Metrics) -> tuple[tuple[str, ...], tuple[MetricFn, ...]]:
    if callable(metric):
        return ("error",), (metric,)
    names = tuple(metric)
    if not names:
        raise InvalidParameter("at least one metric is required")
    return names, tuple(metric[k] for k in names)


def record_ticks(ticks: int, record_every: int) -> np.ndarray:
    marks = np.arange(record_every, ticks + 1, record_every, dtype=np.int64)
    if marks.size == 0 or marks[-1] != ticks:
        marks = np.append(marks, ticks)
    return marks


def run(
    est: Estimator,
    g: Graph,
    dist: EdgeDistribution,
    ticks: int,
    record_every: int,
    metric: Metrics,
    rng: np.random.Generator,
) -> Trace:
    """Run ``ticks`` edge activations of ``est`` and record ``metric`` snapshots."""
    if ticks < 1:
        raise InvalidParameter(f"ticks must be >= 1, got {ticks}")
    if record_every < 1:
        raise InvalidParameter(f"record_every must be >= 1, got {record_every}")
    names, fns = _normalize_metrics(metric)
    sampler = EdgeSampler(g, dist, rng)
    marks = record_ticks(ticks, record_every)
    out = np.empty((1, marks.size, len(fns)))
    on_edge = est.on_edge
    t = 0
    for p, mark in enumerate(marks.tolist()):
        left, right = sampler.draw(mark - t)
        try:
            for i, j in zip(left, right):
                on_edge(i, j)
                t += 1
        except EstimatorFailure as exc:
            exc.tick = t + 1
            raise
        except (ArithmeticError, ValueError) as exc:
            raise EstimatorFailure(f"estimator failed at tick {t + 1}: {exc}", tick=t + 1) from exc
        for k, fn in enumerate(fns):
            out[0, p, k] = fn(est)
    return Trace(ticks=marks, values=out, columns=names)


class TrialSetup(Protocol):
    """Builds a fresh estimator and its metrics for one trial."""

    def __call__(self, rng: np.random.Generator) -> tuple[Estimator, Metrics]: ...


def _one_trial(setup, g, dist, ticks, record_every, base_seed, trial) -> Trace:
    rng = rng_stream(base_seed, trial)
    est, metric = setup(rng)
    return run(est, g, dist, ticks, record_every, metric, rng)


def run_trials(
    setup: TrialSetup,
    g: Graph,
    dist: EdgeDistribution,
    ticks: int,
    trials: int,
    base_seed: int,
    record_every: int = 100,
    workers: int = 1,
) -> Trace:
    """Independent repetitions of :func:`run`, stacked into one :class:`Trace`.

    ``setup`` receives the trial's generator first, so any data placement it
    performs is drawn before the edge sequence. With ``workers > 1`` trials
    run in separate processes and ``setup`` must be picklable.
    """
    if trials < 1:
        raise InvalidParameter(f"trials must be >= 1, got {trials}")
    args = (setup, g, dist, ticks, record_every, base_seed)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_one_trial, *args, t) for t in range(trials)]
            traces = [f.result() for f in futures]
    else:
        traces = []
        for t in range(trials):
            traces.append(_one_trial(*args, t))
            log.debug("trial %d/%d done", t + 1, trials)
    return Trace.stack(traces)
