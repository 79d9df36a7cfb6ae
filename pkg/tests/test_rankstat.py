import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankgossip.engine import rng_stream, run
from rankgossip.errors import EstimatorFailure, InvalidParameter
from rankgossip.graph import async_edge_distribution, build_complete
from rankgossip.rankstat import (
    FixedRanks,
    Partition,
    RankStatistic,
    ScorePair,
    centralized_statistic,
    normal_cdf,
    vanderwaerden_scores,
    wilcoxon_scores,
    wilcoxon_test,
)

mpmath.mp.dps = 40


def mp_two_sided_p(z):
    return float(2 * (1 - mpmath.ncdf(abs(mpmath.mpf(z)))))


def pooled_rank_sum(s1, s2):
    """Sort the pooled sample and add up the 1-based positions of the first sample."""
    pooled = sorted([(v, 1) for v in s1] + [(v, 0) for v in s2])
    return float(sum(pos + 1 for pos, (_, first) in enumerate(pooled) if first))


def test_init_is_all_zero():
    est = RankStatistic([3, 1, 2], wilcoxon_scores(), labels=[True, False, True])
    np.testing.assert_array_equal(est.estimates(), 0.0)
    assert sum(est.z) == 0.0 == est.weighted_sum()


def test_hand_trace_wilcoxon_two_nodes():
    est = RankStatistic([1.0, 2.0], wilcoxon_scores(), labels=[False, True], ties=False)
    est.on_edge(0, 1)
    assert est.w == [2.0, 2.0]
    assert est.z == [1.0, 1.0]
    est.on_edge(0, 1)
    assert est.w == [2.0, 4.0]
    assert est.z == [2.0, 2.0]
    t_n = centralized_statistic([1.0, 2.0], wilcoxon_scores(), [False, True], ties=False)
    assert t_n == 2.0
    assert sum(est.z) == 2 * t_n


def test_no_injection_when_rank_unchanged():
    ranker = FixedRanks([1.0, 2.0, 3.0])
    est = RankStatistic([1.0, 2.0, 3.0], wilcoxon_scores(), labels=[1, 0, 1], ranker=ranker)
    est.on_edge(0, 1)
    z_before = list(est.z)
    est.on_edge(0, 1)
    # Both endpoints already hold their exact weight, so only averaging happens.
    assert est.z == [(z_before[0] + z_before[1]) / 2] * 2 + [0.0]


def test_score_pairs():
    s = wilcoxon_scores()
    assert s.f(3.7) == 3.7
    assert s.g(12.0, False) == 0.0 and s.g(12.0, True) == 1.0
    n = 9
    v = vanderwaerden_scores(n)
    assert v.f((n + 1) / 2) == pytest.approx(0.0, abs=1e-15)
    for r in np.linspace(1, n, 17):
        assert v.f(r) + v.f(n + 1 - r) == pytest.approx(0.0, abs=1e-12)
    assert vanderwaerden_scores(3).f(1) == pytest.approx(float(mpmath.sqrt(2) * mpmath.erfinv(-0.5)), abs=1e-12)
    assert vanderwaerden_scores(3).f(1) == pytest.approx(-0.6744897501960817, abs=1e-12)
    # Out-of-range gossip estimates are clamped.
    assert v.f(0.2) == v.f(1.0) and v.f(n + 0.9) == v.f(n)


def test_partition():
    p = Partition(np.array([True, False, True]))
    assert (p.n1, p.n2, p.n) == (2, 1, 3)
    with pytest.raises(InvalidParameter):
        Partition(np.array([True, True]))


def test_centralized_statistic_examples():
    x = [3.0, 5.0, 1.0, 4.0]
    labels = [True, True, False, False]
    assert centralized_statistic(x, wilcoxon_scores(), labels) == 6.0
    zero = ScorePair(f=lambda r: 0.0, g=lambda x, b: 1.0)
    assert centralized_statistic(x, zero) == 0.0
    all_ranks = ScorePair(f=lambda r: r, g=lambda x, b: 1.0)
    assert centralized_statistic(x, all_ranks) == 4 * 5 / 2


@settings(max_examples=200)
@given(
    st.lists(st.floats(-100, 100), min_size=2, max_size=12, unique=True).flatmap(
        lambda xs: st.tuples(st.just(xs), st.integers(1, len(xs) - 1))
    )
)
def test_centralized_wilcoxon_matches_pooled_ranking(case):
    xs, n1 = case
    labels = [k < n1 for k in range(len(xs))]
    t = centralized_statistic(xs, wilcoxon_scores(), labels, ties=False)
    assert t == pooled_rank_sum(xs[:n1], xs[n1:])
    n2 = len(xs) - n1
    assert n1 * (n1 + 1) / 2 <= t <= n1 * n2 + n1 * (n1 + 1) / 2


def test_wilcoxon_test_examples():
    z, p = wilcoxon_test(1.0, 1, 1)
    assert z == pytest.approx(-1.0, abs=1e-15)
    assert p == pytest.approx(mp_two_sided_p(-1.0), abs=1e-12)
    assert p == pytest.approx(0.31731, abs=1e-5)
    z, p = wilcoxon_test(5.0, 2, 2)
    assert z == 0.0 and p == 1.0
    z, p = wilcoxon_test(6.0, 2, 2)
    assert z == pytest.approx(1 / math.sqrt(20 / 12), abs=1e-12)
    assert z == pytest.approx(0.7746, abs=1e-4)
    assert p == pytest.approx(mp_two_sided_p(z), abs=1e-12)
    assert p == pytest.approx(0.4386, abs=1e-4)
    with pytest.raises(InvalidParameter):
        wilcoxon_test(1.0, 0, 3)


@given(st.integers(1, 60), st.integers(1, 60), st.floats(0, 1))
def test_wilcoxon_test_swap_symmetry(n1, n2, frac):
    n = n1 + n2
    lo, hi = n1 * (n1 + 1) / 2, n1 * n2 + n1 * (n1 + 1) / 2
    t = lo + frac * (hi - lo)
    z, p = wilcoxon_test(t, n1, n2)
    z2, p2 = wilcoxon_test(n * (n + 1) / 2 - t, n2, n1)
    assert z2 == pytest.approx(-z, abs=1e-9)
    assert p2 == pytest.approx(p, abs=1e-10)


@given(st.floats(-8, 8))
def test_normal_cdf_against_mpmath(x):
    assert normal_cdf(x) == pytest.approx(float(mpmath.ncdf(x)), abs=1e-10)


@st.composite
def stat_runs(draw):
    n = draw(st.integers(2, 10))
    x = draw(st.lists(st.integers(0, 5), min_size=n, max_size=n))
    labels = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    edges = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]),
            min_size=1,
            max_size=150,
        )
    )
    return [float(v) for v in x], labels, edges


@settings(max_examples=100, deadline=None)
@given(stat_runs(), st.sampled_from(["wilcoxon", "vdw", "l"]))
def test_sum_conservation(case, kind):
    x, labels, edges = case
    scores = {
        "wilcoxon": wilcoxon_scores(),
        "vdw": vanderwaerden_scores(len(x)),
        "l": ScorePair(f=lambda r: r * r, g=lambda v, b: v),
    }[kind]
    est = RankStatistic(x, scores, labels=labels, ties=True)
    for i, j in edges:
        est.on_edge(i, j)
        assert est.z[i] == est.z[j]
        assert math.fsum(est.z) == pytest.approx(est.weighted_sum(), abs=1e-9)


def test_fixed_ranks_contract_to_exact_statistic():
    g = build_complete(20)
    rng = np.random.default_rng(0)
    x = rng.normal(size=20)
    labels = rng.random(20) < 0.5
    t_n = centralized_statistic(x, wilcoxon_scores(), labels)
    est = RankStatistic(x, wilcoxon_scores(), labels=labels, ranker=FixedRanks(x))
    errors = []
    run(
        est,
        g,
        async_edge_distribution(g),
        10_000,
        50,
        lambda e: errors.append(np.abs(e.estimates() - t_n).max()) or 0.0,
        rng_stream(3),
    )
    assert errors[-1] < 1e-6
    assert errors[0] > errors[4] > errors[9] > errors[19]


def test_non_finite_scores_fail_with_node_index():
    bad = ScorePair(f=lambda r: math.inf if r > 1.5 else r, g=lambda v, b: 1.0)
    est = RankStatistic([1.0, 2.0], bad, ties=False)
    est.on_edge(0, 1)
    with pytest.raises(EstimatorFailure) as info:
        est.on_edge(0, 1)
    assert info.value.node == 1
    with pytest.raises(EstimatorFailure):
        RankStatistic([1.0, 2.0], ScorePair(f=lambda r: r, g=lambda v, b: math.nan))


def test_small_instances_exhaustively():
    # Every labelling of a 6-point sample.
    xs = [0.3, -1.2, 4.0, 2.2, 0.0, 9.5]
    for mask in itertools.product([False, True], repeat=6):
        if not any(mask) or all(mask):
            continue
        s1 = [v for v, m in zip(xs, mask) if m]
        s2 = [v for v, m in zip(xs, mask) if not m]
        assert centralized_statistic(xs, wilcoxon_scores(), mask) == pooled_rank_sum(s1, s2)
