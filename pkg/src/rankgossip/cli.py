"""Command line entry point: ``rankgossip {spectral,rank,wilcoxon,trim}``.

Settings come from defaults, then an optional ``--config`` key-value file,
then explicit flags. Exit status is 0 on success, 2 for an invalid
configuration, 3 when a random graph cannot be generated and 4 when an
estimator fails mid-run.
"""

from __future__ import annotations

import functools
import logging
import sys

import click

from . import experiments as ex
from .errors import EstimatorFailure, GenerationFailure, InvalidInput, InvalidParameter

EXIT_INVALID = 2
EXIT_GENERATION = 3
EXIT_ESTIMATOR = 4


def _options(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="Key-value configuration file; flags override it."),
        click.option("--graph", type=click.Choice(ex.GRAPHS), help="Communication topology."),
        click.option("--n", type=int, help="Number of nodes."),
        click.option("--ws-k", type=int, help="Watts-Strogatz lattice degree."),
        click.option("--ws-p", type=float, help="Watts-Strogatz rewiring probability."),
        click.option("--geo-radius", type=float, help="Random geometric graph radius."),
        click.option("--graph-seed", type=int, help="Graph seed (defaults to --seed)."),
        click.option("--sampling", type=click.Choice(ex.SAMPLINGS),
                     help="Edge law; 'both' (rank only) runs async and uniform."),
        click.option("--ticks", type=float, help="Edge activations per trial."),
        click.option("--trials", type=int, help="Independent trials."),
        click.option("--record-every", type=int, help="Snapshot interval in ticks."),
        click.option("--alpha", type=float, help="Trimming level."),
        click.option("--epsilon", type=float, help="Fraction of values to scale-corrupt."),
        click.option("--scale", type=float, help="Corruption factor s."),
        click.option("--ties/--no-ties", default=None,
                     help="Mid-rank tie handling (default: on iff the data has duplicates)."),
        click.option("--seed", type=int, help="Base seed for trials."),
        click.option("--data-seed", type=int, help="Dataset seed (defaults to --seed)."),
        click.option("--n1", type=int, help="First-sample size for wilcoxon (default n/2)."),
        click.option("--loc1", type=float, help="Cauchy location of the first sample."),
        click.option("--loc2", type=float, help="Cauchy location of the second sample."),
        click.option("--cauchy-scale", type=float, help="Cauchy scale of both samples."),
        click.option("--workers", type=int, help="Worker processes for trials."),
        click.option("--out", type=click.Path(dir_okay=False), help="Output CSV path."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _resolve(experiment: str, config_path, flags: dict) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig()
    if config_path:
        cfg = ex.ExperimentConfig.from_mapping(ex.read_config_file(config_path))
    flags = {k: v for k, v in flags.items() if v is not None}
    flags["experiment"] = experiment
    return cfg.merged(flags).validate()


def _guarded(experiment: str):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(config_path=None, **flags):
            try:
                cfg = _resolve(experiment, config_path, flags)
                fn(cfg)
            except (InvalidParameter, InvalidInput) as exc:
                click.echo(f"invalid configuration: {exc}", err=True)
                sys.exit(EXIT_INVALID)
            except GenerationFailure as exc:
                click.echo(f"graph generation failed: {exc}", err=True)
                sys.exit(EXIT_GENERATION)
            except EstimatorFailure as exc:
                click.echo(f"estimator failure: {exc} (tick={exc.tick}, node={exc.node})", err=True)
                sys.exit(EXIT_ESTIMATOR)

        return inner

    return wrap


def _echo_record(record: dict) -> None:
    for k, v in record.items():
        click.echo(f"{k} = {ex._fmt(v)}")


def _emit(cfg: ex.ExperimentConfig, outcome: ex.Outcome, summary_keys) -> None:
    out = cfg.out or f"{cfg.experiment}.csv"
    paths = ex.output_paths(out, list(outcome.traces))
    for mode, trace in outcome.traces.items():
        ex.write_trace_csv(trace, paths[mode], outcome.extra_columns.get(mode))
        outcome.provenance[f"output.{mode}"] = str(paths[mode])
    ex.write_provenance(outcome.provenance, ex.provenance_path(out))
    _echo_record({k: v for k, v in outcome.provenance.items() if k.startswith(summary_keys)})


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log trial progress.")
def main(verbose):
    """Asynchronous gossip estimation of ranks, rank statistics and trimmed means."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)


@main.command()
@_options
@_guarded("spectral")
def spectral(cfg):
    """Report connectivity and spectral gaps of the configured graph."""
    g = ex.build_graph(cfg)
    report = ex.spectral_report(g)
    _echo_record(report)
    if cfg.out:
        ex.write_provenance(report, cfg.out)


@main.command()
@_options
@_guarded("rank")
def rank(cfg):
    """GoRank normalized rank error on the integer dataset."""
    _emit(cfg, ex.run_rank(cfg), ("graph.", "ties", "result.", "output."))


@main.command()
@_options
@_guarded("wilcoxon")
def wilcoxon(cfg):
    """Gossip Wilcoxon rank-sum statistic on a two-sample Cauchy dataset."""
    _emit(cfg, ex.run_wilcoxon(cfg), ("graph.", "oracle.", "test.", "result.", "output."))


@main.command()
@_options
@_guarded("trim")
def trim(cfg):
    """GoTrim trimmed mean, original and adaptive read-outs."""
    _emit(cfg, ex.run_trim(cfg), ("graph.", "oracle.", "result.", "output."))


if __name__ == "__main__":
    main()
