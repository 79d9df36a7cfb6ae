"""Experiment datasets, contamination models and placement onto graph nodes."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .errors import InvalidParameter
from .graph import Graph

SeedLike = Union[int, np.random.Generator]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Dataset:
    """Values with optional first-sample labels.

    ``corrupted`` lists the indices altered by a contamination step, if any.
    """

    values: np.ndarray
    labels: Optional[np.ndarray] = None
    provenance: str = ""
    corrupted: tuple[int, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise InvalidParameter("dataset is empty")
        object.__setattr__(self, "values", v)
        if self.labels is not None:
            b = np.asarray(self.labels, dtype=bool).ravel()
            if b.size != v.size:
                raise InvalidParameter(f"{b.size} labels for {v.size} values")
            object.__setattr__(self, "labels", b)

    def __len__(self) -> int:
        return self.values.size


def integer_dataset(n: int) -> Dataset:
    if n < 2:
        raise InvalidParameter(f"n must be >= 2, got {n}")
    return Dataset(np.arange(1, n + 1, dtype=float), provenance=f"integers 1..{n}")


def cauchy_quantile(u, loc: float, scale: float):
    return loc + scale * np.tan(np.pi * (np.asarray(u) - 0.5))


def cauchy_two_sample(
    n1: int, n2: int, loc1: float, loc2: float, scale: float, seed: SeedLike
) -> Dataset:
    """``n1`` Cauchy(loc1, scale) draws labelled first, then ``n2`` Cauchy(loc2, scale) draws."""
    if n1 < 1 or n2 < 1:
        raise InvalidParameter(f"sample sizes must be >= 1, got n1={n1}, n2={n2}")
    if scale <= 0:
        raise InvalidParameter(f"scale must be positive, got {scale}")
    rng = _rng(seed)
    u = rng.random(n1 + n2)
    values = np.concatenate(
        [cauchy_quantile(u[:n1], loc1, scale), cauchy_quantile(u[n1:], loc2, scale)]
    )
    labels = np.arange(n1 + n2) < n1
    return Dataset(
        values,
        labels,
        provenance=f"cauchy two-sample n1={n1} loc1={loc1} n2={n2} loc2={loc2} scale={scale}",
    )


def _pick_indices(n: int, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 < epsilon < 0.5:
        raise InvalidParameter(f"epsilon must be in (0, 1/2), got {epsilon}")
    count = math.floor(epsilon * n)
    if count == 0:
        warnings.warn(f"floor(epsilon * n) = 0 for epsilon={epsilon}, n={n}; nothing corrupted")
        return np.empty(0, dtype=np.int64)
    return np.sort(rng.choice(n, size=count, replace=False))


def scale_corrupt(d: Dataset, epsilon: float, s: float, seed: SeedLike) -> Dataset:
    """Multiply ``floor(epsilon * n)`` distinct, uniformly chosen values by ``s``."""
    idx = _pick_indices(len(d), epsilon, _rng(seed))
    values = d.values.copy()
    values[idx] *= s
    return replace(
        d,
        values=values,
        provenance=f"{d.provenance}; scale-corrupted eps={epsilon} s={s}",
        corrupted=tuple(idx.tolist()),
    )


def huber_contaminate(
    d: Dataset,
    epsilon: float,
    outlier_sampler: Callable[[np.random.Generator, int], np.ndarray],
    seed: SeedLike,
) -> Dataset:
    """Replace ``floor(epsilon * n)`` distinct values by draws of ``outlier_sampler(rng, size)``."""
    rng = _rng(seed)
    idx = _pick_indices(len(d), epsilon, rng)
    values = d.values.copy()
    if idx.size:
        values[idx] = np.asarray(outlier_sampler(rng, idx.size), dtype=float)
    return replace(
        d,
        values=values,
        provenance=f"{d.provenance}; huber-contaminated eps={epsilon}",
        corrupted=tuple(idx.tolist()),
    )


def assign_to_nodes(
    d: Dataset, g: Graph, seed: SeedLike
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Place the dataset on the nodes by a uniform random bijection.

    Returns per-node values and, if the dataset is labelled, per-node labels.
    """
    if len(d) != g.n:
        raise InvalidParameter(f"dataset has {len(d)} values but graph has {g.n} nodes")
    perm = _rng(seed).permutation(g.n)
    labels = None if d.labels is None else d.labels[perm]
    return d.values[perm], labels


def save_csv(d: Dataset, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value", "label"])
        for k, v in enumerate(d.values.tolist()):
            label = "" if d.labels is None else ("S1" if d.labels[k] else "S2")
            w.writerow([k, repr(v), label])


def load_csv(path: Union[str, Path]) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda r: int(r["index"]))
    values = [float(r["value"]) for r in rows]
    raw = [r.get("label", "") or "" for r in rows]
    labels = None
    if any(raw):
        labels = [lab.strip().upper() == "S1" for lab in raw]
    return Dataset(values, labels, provenance=f"loaded from {path}")
