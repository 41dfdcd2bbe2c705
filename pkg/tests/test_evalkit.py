"""Evaluation helpers: metrics, predictive scores, summaries, exports."""

from types import SimpleNamespace

import numpy as np
import pytest

from crpblocks.crp import rng_from_seed
from crpblocks.evalkit import (auc_pr, auc_roc, block_summary, edge_score,
                               format_block_summary, degree_distribution_csv,
                               degree_distribution_svg, recovery_score,
                               sample_negatives, score_edges,
                               snapshot_edge_scores)
from crpblocks.gibbs import FitConfig, HyperParams, fit, initialize
from crpblocks.netcore import MultiGraph
from oracle import brute_edge_score

J = 5


def _train_graph():
    # cycle guarantees every node appears on both sides
    rng = rng_from_seed(0, "eval-graph")
    s = list(range(J)) + rng.integers(0, J, 10).tolist()
    r = [(i + 1) % J for i in range(J)] + rng.integers(0, J, 10).tolist()
    return MultiGraph(s, r, num_nodes=J)


@pytest.fixture(scope="module", params=["ndmdnd", "mdnd"])
def fitted(request):
    g = _train_graph()
    cfg = FitConfig(epochs=6, burn_in=2, thin=2, seed=3)
    return g, fit(g, HyperParams(), cfg, request.param, debug=True)


# -- ranking metrics ------------------------------------------------------


def test_auc_roc_hand_example():
    val = auc_roc([0.9, 0.7, 0.6], [0.8, 0.2])
    assert abs(val - 4.0 / 6.0) < 1e-12
    assert auc_roc([2.0, 3.0], [0.0, 1.0]) == 1.0
    assert auc_roc([0.0], [1.0]) == 0.0
    assert auc_roc([0.5], [0.5]) == 0.5


def test_auc_pr_hand_example():
    val = auc_pr([0.9, 0.7, 0.6], [0.8, 0.2])
    assert abs(val - 29.0 / 36.0) < 1e-12
    assert auc_pr([2.0, 3.0], [0.0, 1.0]) == 1.0


def test_auc_pr_breaks_ties_against_positives():
    assert auc_pr([0.8], [0.8]) == 0.5
    # whole batch tied: positives are ranked last
    val = auc_pr([1.0, 1.0], [1.0, 1.0, 1.0])
    want = (1.0 / 4.0 + 2.0 / 5.0) / 2.0
    assert abs(val - want) < 1e-12


def test_null_scores_give_chance_metrics():
    rng = rng_from_seed(1, "null-metrics")
    pos = rng.random(400)
    neg = rng.random(1600)
    assert abs(auc_roc(pos, neg) - 0.5) < 0.05
    assert abs(auc_pr(pos, neg) - 0.2) < 0.05


def test_metrics_invariant_under_monotone_transforms():
    rng = rng_from_seed(2, "monotone")
    pos = rng.random(50)
    neg = rng.random(80)
    f = lambda x: np.exp(3.0 * np.asarray(x) + 1.0)
    assert auc_roc(pos, neg) == auc_roc(f(pos), f(neg))
    assert auc_pr(pos, neg) == auc_pr(f(pos), f(neg))


def test_metrics_reject_empty_sides():
    with pytest.raises(ValueError):
        auc_roc([], [0.1])
    with pytest.raises(ValueError):
        auc_pr([0.1], [])


# -- predictive scores ----------------------------------------------------


def test_snapshot_scores_normalize_over_pair_grid(fitted):
    _, res = fitted
    snap = res.snapshots[-1]
    ss = np.repeat(np.arange(J + 1), J + 1)
    rr = np.tile(np.arange(J + 1), J + 1)
    scores = snapshot_edge_scores(snap, ss, rr)
    assert np.all(scores > 0.0)
    assert abs(float(scores.sum()) - 1.0) < 1e-9


def test_snapshot_scores_match_enumeration(fitted):
    g, res = fitted
    state = res.state
    snap = state.snapshot()
    pairs = [(0, 0), (0, 1), (2, 4), (4, 2), (3, 3), (J, 0), (1, J), (J, J)]
    got = snapshot_edge_scores(snap, [a for a, _ in pairs],
                               [b for _, b in pairs])
    for (s, r), val in zip(pairs, got.tolist()):
        want = brute_edge_score(state, s, r)
        assert abs(val - want) <= 1e-12 * max(1.0, abs(want))


def test_score_edges_averages_snapshots(fitted):
    _, res = fitted
    snaps = res.snapshots
    assert len(snaps) == 2
    ss, rr = [0, 1, J], [1, 0, 2]
    one = snapshot_edge_scores(snaps[0], ss, rr)
    two = snapshot_edge_scores(snaps[1], ss, rr)
    avg = score_edges(snaps, ss, rr)
    assert np.allclose(avg, (one + two) / 2.0, rtol=0, atol=1e-15)
    # batch width changes numpy reduction order; allow 1 ulp
    assert abs(edge_score(snaps, 0, 1) - float(avg[0])) <= 1e-14 * float(avg[0])


def test_score_edges_validation(fitted):
    _, res = fitted
    with pytest.raises(ValueError):
        score_edges([], [0], [1])
    with pytest.raises(ValueError):
        score_edges(res.snapshots, [0, 1], [1])


def test_unseen_node_scored_through_atom():
    # node 3 never occurs in training; it must score exactly like the atom
    g = MultiGraph([0, 1, 2, 0], [1, 2, 0, 2], num_nodes=4)
    state = initialize(g, HyperParams(), "ndmdnd", rng_from_seed(4, "unseen"))
    snap = state.snapshot()
    assert not snap.train_seen[3]
    a = snapshot_edge_scores(snap, [3, 0], [0, 3])
    b = snapshot_edge_scores(snap, [4, 0], [0, 4])
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        snapshot_edge_scores(snap, [5], [0])
    with pytest.raises(ValueError):
        snapshot_edge_scores(snap, [0], [-1])


# -- negatives ------------------------------------------------------------


def test_sample_negatives_enumerated_space():
    g = MultiGraph([0, 0, 1], [1, 2, 2], num_nodes=3)
    rng = rng_from_seed(5, "negs")
    ss, rr = sample_negatives(g, None, rng)
    got = set(zip(ss.tolist(), rr.tolist()))
    want = {(s, r) for s in range(3) for r in range(3)} - {(0, 1), (0, 2), (1, 2)}
    assert got == want
    ss, rr = sample_negatives(g, 2, rng)
    pairs = list(zip(ss.tolist(), rr.tolist()))
    assert len(pairs) == 2 and len(set(pairs)) == 2
    assert all(p in want for p in pairs)
    with pytest.raises(ValueError):
        sample_negatives(g, len(want) + 1, rng)
    with pytest.raises(ValueError):
        sample_negatives(g, 0, rng)


def test_sample_negatives_rejection_path():
    n = 800  # pair space above the enumeration cutoff
    g = MultiGraph([0, 1, 2], [1, 2, 3], num_nodes=n)
    rng = rng_from_seed(6, "negs-big")
    ss, rr = sample_negatives(g, 1000, rng)
    assert ss.shape == (1000,)
    pairs = set(zip(ss.tolist(), rr.tolist()))
    assert len(pairs) == 1000
    assert pairs.isdisjoint({(0, 1), (1, 2), (2, 3)})
    assert int(ss.max()) < n and int(rr.max()) < n


# -- block recovery and summaries ----------------------------------------


def _fake_snap(pairs):
    return SimpleNamespace(edge_pairs=np.asarray(pairs, dtype=np.int64))


def test_recovery_score_perfect_and_permuted():
    truth = [(0, 0), (0, 1), (1, 1), (0, 0)]
    assert recovery_score([_fake_snap(truth)], truth) == 1.0
    flipped = [(1 - a, 1 - b) for a, b in truth]
    assert recovery_score([_fake_snap(flipped)], truth) == 1.0
    # modal vote across snapshots outvotes one bad draw
    bad = [(0, 0)] * 4
    snaps = [_fake_snap(truth), _fake_snap(truth), _fake_snap(bad)]
    assert recovery_score(snaps, truth) == 1.0


def test_recovery_score_degrades_and_validates():
    truth = [(0, 0), (0, 1), (1, 1), (0, 0), (1, 0), (0, 1)]
    merged = [(0, 0)] * 6
    assert recovery_score([_fake_snap(merged)], truth) < 0.5
    with pytest.raises(ValueError):
        recovery_score([], truth)
    with pytest.raises(ValueError):
        recovery_score([_fake_snap(truth[:3])], truth)


def test_block_summary_counts_and_format(fitted):
    g, res = fitted
    snap = res.snapshots[-1]
    summ = block_summary(snap, top=2)
    K = snap.num_blocks
    assert summ.counts.shape == (K, K)
    assert int(summ.counts.sum()) == g.num_edges
    for tops in summ.top_nodes:
        assert 1 <= len(tops) <= 2
        probs = [p for _, p in tops]
        assert probs == sorted(probs, reverse=True)
        assert all(0.0 <= p <= 1.0 for p in probs)
    text = format_block_summary(summ, labeler=lambda v: f"n{v}")
    assert text.startswith(f"blocks: {K}")
    assert "n" in text and "->" in text


# -- degree exports -------------------------------------------------------


def test_degree_distribution_exports(tmp_path):
    g = _train_graph()
    csv = tmp_path / "deg.csv"
    svg = tmp_path / "deg.svg"
    degree_distribution_csv(g, csv)
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "degree,count"
    rows = [tuple(int(x) for x in ln.split(",")) for ln in lines[1:]]
    assert sum(c for _, c in rows) == g.num_nodes
    assert sum(d * c for d, c in rows) == 2 * g.num_edges
    degree_distribution_svg(g, svg)
    head = svg.read_text()[:200]
    assert "svg" in head or "xml" in head
