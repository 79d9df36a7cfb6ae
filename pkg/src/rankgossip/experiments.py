"""Experiment configuration and the rank / Wilcoxon / trimmed-mean / spectral runners.

A run is fully determined by its :class:`ExperimentConfig`. The graph is
drawn once from ``graph_seed``, the base dataset once from ``data_seed``,
and each trial then reshuffles the data over the nodes and draws its edge
sequence from the trial stream of :func:`rankgossip.engine.rng_stream`.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from . import graph as gr
from .data import Dataset, assign_to_nodes, cauchy_two_sample, integer_dataset, scale_corrupt
from .engine import Trace, run_trials
from .errors import InvalidParameter
from .gorank import GoRank, exact_ranks
from .gotrim import GoTrim, centralized_trimmed_mean
from .metrics import rank_error, relative_stat_error, trim_error
from .rankstat import RankStatistic, centralized_statistic, wilcoxon_scores, wilcoxon_test

EXPERIMENTS = ("rank", "wilcoxon", "trim", "spectral")
GRAPHS = ("complete", "ws", "geometric")
SAMPLINGS = ("async", "uniform", "both")


@dataclass
class ExperimentConfig:
    experiment: str = "rank"
    graph: str = "complete"
    n: int = 500
    ws_k: int = 4
    ws_p: float = 0.2
    geo_radius: float = 0.1
    graph_seed: Optional[int] = None
    sampling: str = "async"
    ticks: int = 50_000
    trials: int = 100
    record_every: int = 100
    alpha: Optional[float] = None
    epsilon: Optional[float] = None
    scale: float = 10.0
    ties: Optional[bool] = None
    seed: int = 0
    data_seed: Optional[int] = None
    n1: Optional[int] = None
    loc1: float = 0.8
    loc2: float = 0.0
    cauchy_scale: float = 1.0
    workers: int = 1
    out: Optional[str] = None

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ExperimentConfig":
        """Build from string or typed values; unknown keys are an error."""
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs = {}
        for raw_key, raw in values.items():
            key = raw_key.strip().replace("-", "_")
            if key not in kinds:
                raise InvalidParameter(f"unknown configuration key {raw_key!r}")
            kwargs[key] = _coerce(key, kinds[key], raw)
        return cls(**kwargs)

    def merged(self, overrides: Mapping[str, Any]) -> "ExperimentConfig":
        base = dataclasses.asdict(self)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_mapping(base)

    @property
    def resolved_graph_seed(self) -> int:
        return self.seed if self.graph_seed is None else self.graph_seed

    @property
    def resolved_data_seed(self) -> int:
        return self.seed if self.data_seed is None else self.data_seed

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise InvalidParameter(f"experiment must be one of {EXPERIMENTS}")
        if self.graph not in GRAPHS:
            raise InvalidParameter(f"graph must be one of {GRAPHS}")
        if self.sampling not in SAMPLINGS:
            raise InvalidParameter(f"sampling must be one of {SAMPLINGS}")
        if self.sampling == "both" and self.experiment != "rank":
            raise InvalidParameter("sampling=both is only available for the rank experiment")
        if self.n < 3:
            raise InvalidParameter(f"n must be >= 3, got {self.n}")
        for name in ("ticks", "trials", "record_every", "workers"):
            if getattr(self, name) < 1:
                raise InvalidParameter(f"{name} must be >= 1")
        if min(self.seed, self.resolved_graph_seed, self.resolved_data_seed) < 0:
            raise InvalidParameter("seeds must be non-negative")
        if self.experiment == "trim" and self.alpha is None:
            raise InvalidParameter("the trim experiment needs alpha")
        if self.alpha is not None and not 0.0 <= self.alpha < 0.5:
            raise InvalidParameter(f"alpha must be in [0, 1/2), got {self.alpha}")
        if self.epsilon is not None and not 0.0 < self.epsilon < 0.5:
            raise InvalidParameter(f"epsilon must be in (0, 1/2), got {self.epsilon}")
        if self.experiment == "wilcoxon":
            n1 = self.wilcoxon_n1
            if not 1 <= n1 < self.n:
                raise InvalidParameter(f"need 1 <= n1 < n, got n1={n1}, n={self.n}")
        return self

    @property
    def wilcoxon_n1(self) -> int:
        return self.n // 2 if self.n1 is None else self.n1


def _coerce(key: str, kind, raw):
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none")):
        return None
    kind = str(kind)
    try:
        if "bool" in kind:
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            if text == "auto":
                return None
            raise ValueError(raw)
        if "int" in kind:
            as_float = float(raw)
            if not as_float.is_integer():
                raise ValueError(raw)
            return int(as_float)
        if "float" in kind:
            return float(raw)
        return str(raw).strip()
    except (TypeError, ValueError):
        raise InvalidParameter(f"bad value for {key}: {raw!r}") from None


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` file; an INI section header is optional."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        if not text.lstrip().startswith("["):
            text = "[experiment]\n" + text
        parser.read_string(text)
    except configparser.Error as exc:
        raise InvalidParameter(f"cannot parse {path}: {exc}") from None
    out: dict[str, str] = {}
    for section in parser.sections():
        out.update(parser[section])
    return out


def build_graph(cfg: ExperimentConfig) -> gr.Graph:
    seed = cfg.resolved_graph_seed
    if cfg.graph == "complete":
        return gr.build_complete(cfg.n)
    if cfg.graph == "ws":
        return gr.build_watts_strogatz(cfg.n, cfg.ws_k, cfg.ws_p, seed)
    return gr.build_random_geometric(cfg.n, cfg.geo_radius, seed)


def edge_distribution(g: gr.Graph, sampling: str) -> gr.EdgeDistribution:
    if sampling == "async":
        return gr.async_edge_distribution(g)
    if sampling == "uniform":
        return gr.uniform_edge_distribution(g)
    raise InvalidParameter(f"unknown sampling {sampling!r}")


def spectral_report(g: gr.Graph) -> dict[str, Any]:
    report: dict[str, Any] = {
        "n": g.n,
        "edges": g.num_edges,
        "connected": gr.is_connected(g),
        "bipartite": gr.is_bipartite(g),
    }
    for sampling in ("async", "uniform"):
        dist = edge_distribution(g, sampling)
        c = gr.spectral_gap(gr.weighted_laplacian(g, dist))
        report[f"spectral_gap_{sampling}"] = c
        report[f"lambda2_swap_{sampling}"] = 1.0 - c
        report[f"lambda2_average_{sampling}"] = 1.0 - c / 2.0
    return report


def _ties_for(values: np.ndarray, requested: Optional[bool]) -> bool:
    if requested is not None:
        return requested
    return np.unique(values).size != values.size


@dataclass
class RankSetup:
    dataset: Dataset
    g: gr.Graph
    ties: bool

    def __call__(self, rng):
        values, _ = assign_to_nodes(self.dataset, self.g, rng)
        exact = exact_ranks(values, ties=self.ties)
        n = values.size
        return GoRank(values, ties=self.ties), (
            lambda est: float(rank_error(est.estimates(), exact, n).mean())
        )


@dataclass
class WilcoxonSetup:
    dataset: Dataset
    g: gr.Graph
    ties: bool
    t_n: float

    def __call__(self, rng):
        values, labels = assign_to_nodes(self.dataset, self.g, rng)
        est = RankStatistic(values, wilcoxon_scores(), labels=labels, ties=self.ties)
        return est, (lambda e: relative_stat_error(e.estimates(), self.t_n))


@dataclass
class TrimSetup:
    dataset: Dataset
    g: gr.Graph
    alpha: float
    ties: bool
    target: float

    def __call__(self, rng):
        values, _ = assign_to_nodes(self.dataset, self.g, rng)
        est = GoTrim(values, self.alpha, ties=self.ties)
        return est, {
            "adaptive": lambda e: trim_error(e.adaptive(), self.target),
            "original": lambda e: trim_error(e.original(), self.target),
        }


@dataclass
class Outcome:
    """Traces of one command plus the resolved provenance record."""

    traces: dict[str, Trace]
    provenance: dict[str, Any] = field(default_factory=dict)
    extra_columns: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)


def _base_provenance(cfg: ExperimentConfig, g: gr.Graph) -> dict[str, Any]:
    prov = {f"config.{k}": v for k, v in dataclasses.asdict(cfg).items()}
    prov["config.graph_seed"] = cfg.resolved_graph_seed
    prov["config.data_seed"] = cfg.resolved_data_seed
    prov["graph.edges"] = g.num_edges
    prov["graph.spectral_gap_async"] = gr.spectral_gap(
        gr.weighted_laplacian(g, gr.async_edge_distribution(g))
    )
    prov["graph.spectral_gap_uniform"] = gr.spectral_gap(
        gr.weighted_laplacian(g, gr.uniform_edge_distribution(g))
    )
    prov["rng.trial_stream"] = "PCG64(SeedSequence([seed, trial]))"
    return prov


def _trials(cfg, setup, g, sampling) -> Trace:
    return run_trials(
        setup,
        g,
        edge_distribution(g, sampling),
        ticks=cfg.ticks,
        trials=cfg.trials,
        base_seed=cfg.seed,
        record_every=cfg.record_every,
        workers=cfg.workers,
    )


def run_rank(cfg: ExperimentConfig) -> Outcome:
    cfg.validate()
    g = build_graph(cfg)
    ds = integer_dataset(cfg.n)
    if cfg.epsilon is not None:
        ds = scale_corrupt(ds, cfg.epsilon, cfg.scale, cfg.resolved_data_seed)
    ties = _ties_for(ds.values, cfg.ties)
    setup = RankSetup(ds, g, ties)
    modes = ("async", "uniform") if cfg.sampling == "both" else (cfg.sampling,)
    traces = {mode: _trials(cfg, setup, g, mode) for mode in modes}
    prov = _base_provenance(cfg, g)
    prov["data.provenance"] = ds.provenance
    prov["ties"] = ties
    for mode, tr in traces.items():
        prov[f"result.{mode}.final_mean_error"] = float(tr.mean()[-1])
    return Outcome(traces, prov)


def wilcoxon_dataset(cfg: ExperimentConfig) -> Dataset:
    n1 = cfg.wilcoxon_n1
    return cauchy_two_sample(
        n1, cfg.n - n1, cfg.loc1, cfg.loc2, cfg.cauchy_scale, cfg.resolved_data_seed
    )


def run_wilcoxon(cfg: ExperimentConfig) -> Outcome:
    cfg.validate()
    g = build_graph(cfg)
    ds = wilcoxon_dataset(cfg)
    if cfg.epsilon is not None:
        ds = scale_corrupt(ds, cfg.epsilon, cfg.scale, cfg.resolved_data_seed)
    ties = _ties_for(ds.values, cfg.ties)
    # The rank sum depends only on which values carry the first-sample
    # label, so it is the same for every placement.
    t_n = centralized_statistic(ds.values, wilcoxon_scores(), ds.labels, ties=ties)
    tr = _trials(cfg, WilcoxonSetup(ds, g, ties, t_n), g, cfg.sampling)
    n1 = int(ds.labels.sum())
    test = wilcoxon_test(t_n, n1, len(ds) - n1)
    prov = _base_provenance(cfg, g)
    prov.update(
        {
            "data.provenance": ds.provenance,
            "ties": ties,
            "oracle.t_n": t_n,
            "oracle.n1": n1,
            "oracle.n2": len(ds) - n1,
            "test.z": test.z,
            "test.p": test.p,
            "result.final_mean_relative_error": float(tr.mean()[-1]),
        }
    )
    return Outcome({cfg.sampling: tr}, prov)


def run_trim(cfg: ExperimentConfig) -> Outcome:
    cfg.validate()
    g = build_graph(cfg)
    clean = integer_dataset(cfg.n)
    ds = clean
    if cfg.epsilon is not None:
        ds = scale_corrupt(clean, cfg.epsilon, cfg.scale, cfg.resolved_data_seed)
    ties = _ties_for(ds.values, cfg.ties)
    target = centralized_trimmed_mean(ds.values, cfg.alpha)
    naive = float(ds.values.mean())
    tr = _trials(cfg, TrimSetup(ds, g, cfg.alpha, ties, target), g, cfg.sampling)
    baseline = abs(naive - target)
    prov = _base_provenance(cfg, g)
    prov.update(
        {
            "data.provenance": ds.provenance,
            "data.corrupted_count": len(ds.corrupted),
            "ties": ties,
            "oracle.trimmed_mean": target,
            "oracle.clean_trimmed_mean": centralized_trimmed_mean(clean.values, cfg.alpha),
            "oracle.naive_mean": naive,
            "oracle.naive_mean_error": baseline,
            "result.final_adaptive_error": float(tr.mean("adaptive")[-1]),
            "result.final_original_error": float(tr.mean("original")[-1]),
        }
    )
    extra = {cfg.sampling: {"corrupted_mean_error": np.full(tr.ticks.size, baseline)}}
    return Outcome({cfg.sampling: tr}, prov, extra)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}" if math.isfinite(v) else str(float(v))
    if v is None:
        return "none"
    return str(v)


TRACE_HEADER = ("tick", "mean_error", "std_error")


def write_trace_csv(trace: Trace, path, extra: Optional[Mapping[str, np.ndarray]] = None) -> None:
    """CSV with ``tick,mean_error,std_error`` for the first metric, then the others.

    Additional metrics contribute ``<name>_mean_error,<name>_std_error``;
    ``extra`` adds constant or precomputed columns verbatim.
    """
    cols = [("mean_error", trace.mean(trace.columns[0])), ("std_error", trace.std(trace.columns[0]))]
    for name in trace.columns[1:]:
        cols.append((f"{name}_mean_error", trace.mean(name)))
        cols.append((f"{name}_std_error", trace.std(name)))
    for name, values in (extra or {}).items():
        cols.append((name, np.asarray(values, dtype=float)))
    lines = [",".join(["tick"] + [c for c, _ in cols])]
    for p, tick in enumerate(trace.ticks.tolist()):
        lines.append(",".join([str(tick)] + [_fmt(v[p]) for _, v in cols]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_provenance(record: Mapping[str, Any], path) -> None:
    Path(path).write_text("".join(f"{k} = {_fmt(v)}\n" for k, v in record.items()))


def output_paths(out: str, modes) -> dict[str, Path]:
    """One CSV per sampling mode; a single mode writes exactly ``out``."""
    base = Path(out)
    if len(modes) == 1:
        return {modes[0]: base}
    return {m: base.with_name(f"{base.stem}_{m}{base.suffix or '.csv'}") for m in modes}


def provenance_path(out: str) -> Path:
    base = Path(out)
    return base.with_name(base.stem + ".provenance.txt")


RUNNERS = {"rank": run_rank, "wilcoxon": run_wilcoxon, "trim": run_trim}
