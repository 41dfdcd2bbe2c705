"""Held-out link scoring, ranking metrics, and posterior summaries.

Edge probabilities are posterior predictive masses for "the next edge is
(s, r)" given a fitted state, averaged over snapshots. For a fixed snapshot
the scores over the (J+1) x (J+1) grid of ordered pairs (including the
unseen-node atom on each side) sum exactly to one, so scores are comparable
across candidate edges and across models. Test nodes that never appear in
the training edges are scored through the unseen atom.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .genmodel import GroundTruth
from .gibbs.state import Snapshot
from .netcore import MultiGraph, degree_stats

__all__ = ["auc_pr", "auc_roc", "block_summary", "BlockSummary",
           "degree_distribution_csv", "degree_distribution_svg", "edge_score",
           "recovery_score", "sample_negatives", "score_edges",
           "snapshot_edge_scores"]


def _map_nodes(snap: Snapshot, ids) -> np.ndarray:
    """Validate ids and reroute training-unseen nodes to the unseen atom."""
    ids = np.asarray(ids, dtype=np.int64)
    J = snap.num_nodes
    if ids.size and (ids.min() < 0 or ids.max() > J):
        raise ValueError(
            f"node id outside 0..{J} (use {J} for an explicit unseen node)")
    out = ids.copy()
    if ids.size:
        in_vocab = ids < J
        unseen = in_vocab & ~snap.train_seen[np.where(in_vocab, ids, 0)]
        out[unseen] = J
    return out


def snapshot_edge_scores(snap: Snapshot, senders, receivers) -> np.ndarray:
    """Predictive probability of each (sender, receiver) pair under one snapshot."""
    S = _map_nodes(snap, senders)
    R = _map_nodes(snap, receivers)
    hp = snap.hp
    tau_n = hp.tau_node
    tp = hp.tau_pair
    K = snap.num_blocks
    beta = snap.beta
    bs = beta[S]
    br = beta[R]
    same = (S == R).astype(np.float64)
    fstar = (same + tau_n * br) / (1.0 + tau_n)
    denom = snap.num_edges + tp
    total = np.zeros(S.shape[0])
    if K:
        nkd = snap.nk_dot[:, None]
        fs = (snap.nkv[:, S] + tau_n * bs) / (nkd + tau_n)
        fr = (snap.nkv[:, R] + tau_n * br) / (nkd + tau_n)
        frp = (snap.nkv[:, R] + same + tau_n * br) / (nkd + 1.0 + tau_n)
        for a, b, w in zip(snap.pair_a.tolist(), snap.pair_b.tolist(),
                           snap.pair_w.tolist()):
            total += (w / denom) * fs[a] * (frp[a] if a == b else fr[b])
    if snap.kind == "mdnd":
        pnew = bs * fstar
    else:
        tb = hp.tau_block
        gb = hp.gamma_block
        D = snap.num_pair_tables + tb
        M = snap.num_block_tables
        pnew = np.zeros(S.shape[0])
        if K:
            Enr = snap.nr @ fr
            Emf = snap.m @ fr
            d = frp - fr
            for k in range(K):
                basek = (Enr + snap.nr[k] * d[k]) / D
                PrA = basek + (tb / D) * (Emf + snap.m[k] * d[k] + gb * br) / (M + gb)
                PrB = basek + (tb / D) * (Emf + snap.m[k] * d[k] + frp[k]
                                          + gb * br) / (M + 1.0 + gb)
                pnew += (snap.ns[k] / D) * fs[k] * PrA
                pnew += (tb / D) * (snap.m[k] / (M + gb)) * fs[k] * PrB
        else:
            Enr = Emf = 0.0
        PrC = Enr / D + (tb / D) * (Emf + fstar + gb * br) / (M + 1.0 + gb)
        pnew = pnew + (tb / D) * (gb / (M + gb)) * bs * PrC
    return total + (tp / denom) * pnew


def score_edges(snapshots, senders, receivers) -> np.ndarray:
    """Snapshot-averaged predictive probabilities for parallel id arrays."""
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("need at least one snapshot to score edges")
    S = np.asarray(senders, dtype=np.int64)
    R = np.asarray(receivers, dtype=np.int64)
    if S.shape != R.shape:
        raise ValueError("senders/receivers must be parallel arrays")
    acc = np.zeros(S.shape[0])
    for snap in snapshots:
        acc += snapshot_edge_scores(snap, S, R)
    return acc / len(snapshots)


def edge_score(snapshots, sender: int, receiver: int) -> float:
    return float(score_edges(snapshots, [sender], [receiver])[0])


def sample_negatives(g: MultiGraph, count: int | None,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ordered node pairs that are not edges of g, uniformly, no repeats.

    count=None takes the whole complement. Small pair spaces are enumerated;
    large ones are rejection-sampled, which stays cheap while the requested
    count is under half the complement.
    """
    J = g.num_nodes
    pos = g.unique_pairs()
    space = J * J
    n_free = space - len(pos)
    if count is None:
        count = n_free
    if count < 1:
        raise ValueError("count must be positive")
    if count > n_free:
        raise ValueError(f"asked for {count} negatives, only {n_free} non-edges exist")
    if space <= 500_000 or count * 2 >= n_free:
        free = [(s, r) for s in range(J) for r in range(J) if (s, r) not in pos]
        idx = rng.choice(len(free), size=count, replace=False) if count < len(free) \
            else np.arange(len(free))
        ss = np.array([free[int(i)][0] for i in idx], dtype=np.int64)
        rr = np.array([free[int(i)][1] for i in idx], dtype=np.int64)
        return ss, rr
    seen: set[tuple[int, int]] = set()
    out_s: list[int] = []
    out_r: list[int] = []
    while len(out_s) < count:
        cand_s = rng.integers(J, size=4096)
        cand_r = rng.integers(J, size=4096)
        for s, r in zip(cand_s.tolist(), cand_r.tolist()):
            if (s, r) in pos or (s, r) in seen:
                continue
            seen.add((s, r))
            out_s.append(s)
            out_r.append(r)
            if len(out_s) == count:
                break
    return np.array(out_s, dtype=np.int64), np.array(out_r, dtype=np.int64)


def auc_roc(pos_scores, neg_scores) -> float:
    """Probability a positive outranks a negative; ties count half."""
    from scipy.stats import rankdata
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both score sets must be non-empty")
    ranks = rankdata(np.concatenate([pos, neg]))
    rank_sum = float(ranks[:pos.size].sum())
    return (rank_sum - pos.size * (pos.size + 1) / 2.0) / (pos.size * neg.size)


def auc_pr(pos_scores, neg_scores) -> float:
    """Average precision over the ranking, ties resolved pessimistically.

    Within a tied score group every negative is placed ahead of every
    positive, so equal-scoring noise cannot inflate the number.
    """
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both score sets must be non-empty")
    scores = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(pos.size, dtype=np.int64),
                             np.zeros(neg.size, dtype=np.int64)])
    order = np.lexsort((labels, -scores))
    lab = labels[order]
    hits = np.cumsum(lab)
    at_pos = np.flatnonzero(lab == 1)
    precision = hits[at_pos] / (at_pos + 1.0)
    return float(precision.mean())


def canonical_pairs(snap: Snapshot) -> list[tuple[int, int]]:
    """Per-edge block pairs with labels renumbered by first appearance."""
    remap: dict[int, int] = {}
    out = []
    for a, b in snap.edge_pairs.tolist():
        for k in (a, b):
            if k not in remap:
                remap[k] = len(remap)
        out.append((remap[a], remap[b]))
    return out


def recovery_score(snapshots, truth) -> float:
    """Adjusted Rand index between modal inferred and true edge block pairs.

    Each edge is assigned its most frequent canonical (sender block, receiver
    block) pair across snapshots; agreement with the generating pair labels
    is label-permutation-invariant.
    """
    from sklearn.metrics import adjusted_rand_score
    if isinstance(truth, GroundTruth):
        truth = truth.pair_labels()
    truth = list(truth)
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("need at least one snapshot")
    votes = [Counter() for _ in truth]
    for snap in snapshots:
        pairs = canonical_pairs(snap)
        if len(pairs) != len(truth):
            raise ValueError("snapshot edge count does not match ground truth")
        for i, pr in enumerate(pairs):
            votes[i][pr] += 1
    modal = [v.most_common(1)[0][0] for v in votes]
    enc_p: dict[tuple[int, int], int] = {}
    enc_t: dict[tuple[int, int], int] = {}
    pred = [enc_p.setdefault(p, len(enc_p)) for p in modal]
    true = [enc_t.setdefault(tuple(p), len(enc_t)) for p in truth]
    return float(adjusted_rand_score(true, pred))


@dataclass
class BlockSummary:
    """Edge counts per block pair and the highest-mass nodes of each block."""

    counts: np.ndarray
    top_nodes: list[list[tuple[int, float]]]


def block_summary(snap: Snapshot, top: int = 3) -> BlockSummary:
    K = snap.num_blocks
    counts = np.zeros((K, K), dtype=np.int64)
    for a, b in snap.edge_pairs.tolist():
        counts[a, b] += 1
    tau_n = snap.hp.tau_node
    tops = []
    for k in range(K):
        f = (snap.nkv[k, :snap.num_nodes] + tau_n * snap.beta[:snap.num_nodes]) \
            / (snap.nk_dot[k] + tau_n)
        idx = np.argsort(-f, kind="stable")[:top]
        tops.append([(int(v), float(f[v])) for v in idx])
    return BlockSummary(counts=counts, top_nodes=tops)


def format_block_summary(summ: BlockSummary, labeler=str) -> str:
    lines = []
    K = summ.counts.shape[0]
    lines.append(f"blocks: {K}")
    for k in range(K):
        sent = int(summ.counts[k, :].sum())
        recv = int(summ.counts[:, k].sum())
        names = ", ".join(f"{labeler(v)} ({p:.3f})" for v, p in summ.top_nodes[k])
        lines.append(f"block {k}: sends {sent}, receives {recv}; top nodes: {names}")
    live = np.argwhere(summ.counts > 0)
    lines.append("edges by block pair:")
    for a, b in live.tolist():
        lines.append(f"  {a} -> {b}: {int(summ.counts[a, b])}")
    return "\n".join(lines)


def degree_distribution_csv(g: MultiGraph, path) -> None:
    """Histogram of total degrees (in + out, multiplicity counted) as CSV."""
    deg = degree_stats(g).total
    vals, cnt = np.unique(deg, return_counts=True)
    with open(path, "w") as fh:
        fh.write("degree,count\n")
        for v, c in zip(vals.tolist(), cnt.tolist()):
            fh.write(f"{v},{c}\n")


def degree_distribution_svg(g: MultiGraph, path) -> None:
    """Log-log degree histogram rendered to an SVG file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    deg = degree_stats(g).total
    vals, cnt = np.unique(deg, return_counts=True)
    keep = vals > 0
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(vals[keep], cnt[keep], "o", markersize=4)
    ax.set_xlabel("degree")
    ax.set_ylabel("number of nodes")
    ax.set_title("degree distribution")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
