"""Collapsed Gibbs kernels over the seating state.

resample_edge redraws one edge's full chain from its exact conditional. The
pair-table weights marginalize everything downstream; when "new pair table"
wins, the sender choice, receiver choice and node tables are drawn from their
exact conditionals in turn. Two couplings make the new-pair branch more than
a product of per-side marginals: the sender's endpoint changes the node
counts the receiver sees when both land in one block, and a sender-side new
block table shifts the shared block menu before the receiver draws from it.
Both are carried exactly; held-out scores reuse the same quantities, which is
what makes them normalize over the (J+1)^2 event grid.

Scenario grouping keeps the new-pair marginal O(K): a sender lands either at
an existing block table of block k, at a new table labeled with existing k,
or at a new table with a fresh block. Each scenario has a closed-form
receiver-side marginal built from two dot products and a rank-one correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..crp import rng_from_seed
from ..netcore import MultiGraph
from .params import FitConfig, HyperParams
from .state import BETA_FLOOR, SeatingState, Snapshot

__all__ = ["fit", "FitResult", "initialize", "resample_edge",
           "resample_block_tables", "resample_beta"]


def resample_beta(state: SeatingState, rng: np.random.Generator) -> None:
    """Redraw the node base measure from node-table label counts.

    With no node tables at all the measure degenerates to all mass on the
    unseen atom. Nodes without tables get exactly zero mass (they are scored
    through the unseen atom); the unseen atom is floored against underflow.
    """
    J = state.J
    if state.num_node_tables == 0:
        beta = np.zeros(J + 1)
        beta[J] = 1.0
    else:
        x = np.zeros(J + 1)
        pos = np.flatnonzero(state.rho)
        x[pos] = rng.gamma(state.rho[pos].astype(np.float64))
        x[J] = rng.gamma(state.hp.gamma_node)
        beta = x / x.sum()
        if beta[J] < BETA_FLOOR:
            beta[J] = BETA_FLOOR
    state.beta = beta
    state.recompute_log_dish()


def _reseat_edge(state: SeatingState, i: int, rng: np.random.Generator) -> None:
    # Draw the full chain for edge i, currently unseated, and seat it.
    # Scalar arithmetic throughout: realistic states hold tens of blocks and
    # a few hundred pair tables, where numpy dispatch costs more than the
    # math it replaces.
    s = int(state.senders[i])
    r = int(state.receivers[i])
    hp = state.hp
    tau_n = hp.tau_node
    bs = float(state.beta[s])
    br = float(state.beta[r])
    same = 1.0 if s == r else 0.0
    fstar = (same + tau_n * br) / (1.0 + tau_n)
    K = state.K
    tbs = tau_n * bs
    tbr = tau_n * br
    if K:
        nkd = state.nk_dot[:K].tolist()
        col_s = state.nkv[:K, s].tolist()
        col_r = state.nkv[:K, r].tolist()
        fs = [(col_s[k] + tbs) / (nkd[k] + tau_n) for k in range(K)]
        fr = [(col_r[k] + tbr) / (nkd[k] + tau_n) for k in range(K)]
        frp = [(col_r[k] + same + tbr) / (nkd[k] + 1.0 + tau_n)
               for k in range(K)]
    else:
        fs = fr = frp = []

    P = state.P
    w_exist: list[float] = []
    w_exist_total = 0.0
    if P:
        pa = state.st_block[state.pt_s[:P]].tolist()
        pb = state.rt_block[state.pt_r[:P]].tolist()
        cnt = state.pt_count[:P].tolist()
        for t in range(P):
            a = pa[t]
            b = pb[t]
            w = cnt[t] * fs[a] * (frp[a] if a == b else fr[b])
            w_exist.append(w)
            w_exist_total += w
    else:
        pa = pb = []

    if state.kind == "mdnd":
        w_new = hp.tau_pair * bs * fstar
    else:
        tb = hp.tau_block
        gb = hp.gamma_block
        D = P + tb
        M = state.M
        wA: list[float] = []
        wB: list[float] = []
        wAB_total = 0.0
        if K:
            ns_l = state.ns[:K].tolist()
            nr_l = state.nr[:K].tolist()
            m_l = state.m[:K].tolist()
            Enr = 0.0
            Emf = 0.0
            for k in range(K):
                Enr += nr_l[k] * fr[k]
                Emf += m_l[k] * fr[k]
            for k in range(K):
                dk = frp[k] - fr[k]
                base = (Enr + nr_l[k] * dk) / D
                PrA = base + (tb / D) * (Emf + m_l[k] * dk + gb * br) / (M + gb)
                PrB = base + (tb / D) * (Emf + m_l[k] * dk + frp[k]
                                         + gb * br) / (M + 1.0 + gb)
                wa = (ns_l[k] / D) * fs[k] * PrA
                wb = (tb / D) * (m_l[k] / (M + gb)) * fs[k] * PrB
                wA.append(wa)
                wB.append(wb)
                wAB_total += wa + wb
        else:
            Enr = Emf = 0.0
        PrC = Enr / D + (tb / D) * (Emf + fstar + gb * br) / (M + 1.0 + gb)
        wC = (tb / D) * (gb / (M + gb)) * bs * PrC
        w_new = hp.tau_pair * (wAB_total + wC)

    total = w_exist_total + w_new
    if not (math.isfinite(total) and total > 0.0):
        raise RuntimeError(f"degenerate edge weights for edge {i}: total={total}")
    u = rng.random() * total
    if u < w_exist_total:
        t = P - 1
        acc = 0.0
        for j in range(P):
            acc += w_exist[j]
            if u < acc:
                t = j
                break
        state.seat_edge_existing(i, t)
        ks = pa[t]
        kr = pb[t]
    elif state.kind == "mdnd":
        k = state.create_block()
        st = state.create_side_table(0, k)
        rt = state.create_side_table(1, k)
        state.create_pair_table(i, st, rt)
        ks = kr = k
    else:
        u2 = rng.random() * (wAB_total + wC)
        pick = 2 * K
        acc = 0.0
        for k in range(K):
            acc += wA[k]
            if u2 < acc:
                pick = k
                break
        if pick == 2 * K:
            for k in range(K):
                acc += wB[k]
                if u2 < acc:
                    pick = K + k
                    break
        if pick < K:
            ka = pick
            stb = state.st_block[:state.Ts].tolist()
            stc = state.st_count[:state.Ts].tolist()
            w3 = 0.0
            for tt in range(state.Ts):
                if stb[tt] == ka:
                    w3 += stc[tt]
            u3 = rng.random() * w3
            st = -1
            acc = 0.0
            for tt in range(state.Ts):
                if stb[tt] == ka:
                    st = tt
                    acc += stc[tt]
                    if u3 < acc:
                        break
        elif pick < 2 * K:
            ka = pick - K
            st = state.create_side_table(0, ka)
        else:
            ka = state.create_block()
            st = state.create_side_table(0, ka)
        # Receiver conditional, with the sender's endpoint pending in block ka
        # and the menu already holding any sender-side additions.
        K2 = state.K
        M2 = state.M
        f_adj = fr + [0.0] if K2 > K else list(fr)
        f_adj[ka] = frp[ka] if ka < K else fstar
        Tr = state.Tr
        rtb = state.rt_block[:Tr].tolist()
        rtc = state.rt_count[:Tr].tolist()
        m2 = state.m[:K2].tolist()
        dm = M2 + gb
        wr: list[float] = []
        wr_total = 0.0
        for tt in range(Tr):
            w = rtc[tt] * f_adj[rtb[tt]]
            wr.append(w)
            wr_total += w
        for k in range(K2):
            w = tb * m2[k] * f_adj[k] / dm
            wr.append(w)
            wr_total += w
        wr_total += tb * gb * br / dm
        u4 = rng.random() * wr_total
        c2 = Tr + K2
        acc = 0.0
        for j in range(Tr + K2):
            acc += wr[j]
            if u4 < acc:
                c2 = j
                break
        if c2 < Tr:
            rt = c2
        elif c2 < Tr + K2:
            rt = state.create_side_table(1, c2 - Tr)
        else:
            kb = state.create_block()
            rt = state.create_side_table(1, kb)
        state.create_pair_table(i, st, rt)
        ks = ka
        kr = int(state.rt_block[rt])
    state.seat_node_sampled(ks, s, 2 * i, rng)
    state.seat_node_sampled(kr, r, 2 * i + 1, rng)


def resample_edge(state: SeatingState, i: int, rng: np.random.Generator) -> None:
    """One Gibbs step: tear edge i out of the chain and redraw its seats."""
    state.unseat_edge(i)
    _reseat_edge(state, i, rng)


def _resample_side_table_label(state: SeatingState, side: int, t: int,
                               rng: np.random.Generator) -> None:
    hp = state.hp
    tau_n = hp.tau_node
    count, block, members = state._side_arrays(side)
    a = int(block[t])
    seats: list[tuple[int, int]] = []
    for ptid in members[t]:
        for e in state.pt_members[ptid]:
            v = int(state.senders[e]) if side == 0 else int(state.receivers[e])
            seats.append((2 * e + side, v))
    # process endpoints in edge order so the move is a function of the
    # assignment alone; member lists carry arbitrary construction order
    seats.sort()
    vs = [v for _, v in seats]
    for eid, v in seats:
        state._node_unseat(a, v, eid)
    state._menu_unseat(a)  # block a kept alive as a (possibly zero-weight) candidate

    K = state.K
    counts: dict[int, int] = {}
    for v in vs:
        counts[v] = counts.get(v, 0) + 1
    # log joint predictive of the endpoint multiset under each block, plus a
    # fresh block in the last slot; sequential accumulation, order-free.
    logg = [0.0] * (K + 1)
    nkd = state.nk_dot[:K].tolist() + [0.0]
    beta = state.beta
    for v, c in counts.items():
        col = state.nkv[:K, v].tolist() + [0.0]
        tb_v = tau_n * float(beta[v])
        for k in range(K + 1):
            acc = logg[k]
            base = col[k] + tb_v
            for j in range(c):
                acc += math.log(base + j)
            logg[k] = acc
    n_all = len(vs)
    for k in range(K + 1):
        acc = logg[k]
        base = nkd[k] + tau_n
        for j in range(n_all):
            acc -= math.log(base + j)
        logg[k] = acc
    # weights m_k * exp(logg_k); shifting by max(logg) keeps every term in
    # range and sends empty candidate blocks (m_k = 0) to zero weight
    m_l = state.m[:K].tolist()
    mx = max(logg)
    w = [m_l[k] * math.exp(logg[k] - mx) for k in range(K)]
    w.append(hp.gamma_block * math.exp(logg[K] - mx))
    total = 0.0
    for x in w:
        total += x
    u = rng.random() * total
    choice = K
    acc = 0.0
    for k in range(K + 1):
        acc += w[k]
        if u < acc:
            choice = k
            break
    b = state.create_block() if choice == K else choice
    if b != a:
        cnt = int(count[t])
        if side == 0:
            state.ns[a] -= cnt
            state.ns[b] += cnt
        else:
            state.nr[a] -= cnt
            state.nr[b] += cnt
        block[t] = b
    state._menu_seat(b)
    for eid, v in seats:
        state.seat_node_sampled(b, v, eid, rng)
    if state.m[a] == 0:
        state._block_remove(a)


def resample_block_tables(state: SeatingState, rng: np.random.Generator,
                          limit: int | None = None) -> None:
    """Redraw block labels of block tables, migrating their node seats.

    With limit=None every live table (both sides) is visited once in random
    order; otherwise `limit` tables are drawn at random. A no-op for the
    diagonal model, whose labels are determined by its pair tables.
    """
    if state.kind == "mdnd":
        return
    tables = [(0, t) for t in range(state.Ts)] + [(1, t) for t in range(state.Tr)]
    if not tables:
        return
    if limit is None:
        order = [tables[j] for j in rng.permutation(len(tables))]
    else:
        order = [tables[int(j)] for j in rng.integers(len(tables), size=limit)]
    for side, t in order:
        _resample_side_table_label(state, side, t, rng)


def initialize(graph: MultiGraph, hp: HyperParams, kind: str = "ndmdnd",
               rng: np.random.Generator | None = None,
               beta: np.ndarray | None = None) -> SeatingState:
    """Seat all edges once, sequentially, through the prior predictive."""
    if graph.num_edges < 1:
        raise ValueError("cannot initialize on an empty graph")
    if rng is None:
        rng = rng_from_seed(0, "init")
    state = SeatingState(graph, hp, kind, beta=beta)
    for i in range(graph.num_edges):
        _reseat_edge(state, i, rng)
    return state


@dataclass
class FitResult:
    """Snapshots, per-epoch trace rows and the final state of one chain.

    Trace rows are (epoch, num_blocks, num_pair_tables, num_block_tables,
    log_score).
    """

    snapshots: list[Snapshot]
    trace: list[tuple[int, int, int, int, float]]
    state: SeatingState = field(repr=False)


def fit(graph: MultiGraph, hp: HyperParams | None = None,
        cfg: FitConfig | None = None, kind: str = "ndmdnd",
        rng: np.random.Generator | None = None, debug: bool = False) -> FitResult:
    """Run collapsed Gibbs on the training graph.

    Per epoch: the base measure is redrawn once, then t1 edge steps (default:
    one pass over a fresh permutation of all edges), then block-table label
    steps (default: every live table once). Snapshots are collected after
    burn_in every `thin` epochs. debug=True recomputes all caches from the
    chain after every epoch and raises on any mismatch.
    """
    hp = hp if hp is not None else HyperParams()
    cfg = cfg if cfg is not None else FitConfig()
    if rng is None:
        rng = rng_from_seed(cfg.seed, f"fit-{kind}")
    state = initialize(graph, hp, kind, rng)
    state.rng = rng
    snapshots: list[Snapshot] = []
    trace: list[tuple[int, int, int, int, float]] = []
    n = graph.num_edges
    for epoch in range(1, cfg.epochs + 1):
        resample_beta(state, rng)
        if cfg.t1 is None:
            for i in rng.permutation(n):
                resample_edge(state, int(i), rng)
        else:
            for i in rng.integers(n, size=cfg.t1):
                resample_edge(state, int(i), rng)
        if state.kind == "ndmdnd":
            resample_block_tables(state, rng, limit=cfg.t2)
        if debug:
            state.check_consistency()
        trace.append((epoch, state.K, state.P, state.Ts + state.Tr,
                      float(state.log_score)))
        if epoch > cfg.burn_in and (epoch - cfg.burn_in) % cfg.thin == 0:
            snapshots.append(state.snapshot(epoch))
    return FitResult(snapshots=snapshots, trace=trace, state=state)
