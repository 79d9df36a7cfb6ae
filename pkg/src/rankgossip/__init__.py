"""Asynchronous gossip algorithms for ranks, rank statistics and trimmed means."""

from .engine import EdgeSampler, Trace, draw_edge, rng_stream, run, run_trials
from .errors import (
    EstimatorFailure,
    GenerationFailure,
    InvalidInput,
    InvalidParameter,
    RankGossipError,
)
from .gorank import GoRank, exact_ranks, rank_estimates, sync_variant_distribution
from .gotrim import GoTrim, TrimParams, centralized_trimmed_mean, gamma_diagnostic, trim_weight
from .graph import (
    EdgeDistribution,
    Graph,
    async_edge_distribution,
    build_complete,
    build_random_geometric,
    build_watts_strogatz,
    expected_gossip_matrix,
    is_bipartite,
    is_connected,
    sample_gossip_matrix,
    spectral_gap,
    uniform_edge_distribution,
    weighted_laplacian,
)
from .rankstat import (
    Partition,
    RankStatistic,
    ScorePair,
    centralized_statistic,
    vanderwaerden_scores,
    wilcoxon_scores,
    wilcoxon_test,
)

__version__ = "0.1.0"
