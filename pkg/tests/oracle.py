"""Independent references the samplers are tested against.

Everything here recomputes model quantities from first principles (explicit
enumeration of the sequential seating process, with the base measure held
fixed), sharing no formulas with the package internals beyond the model
definition itself. Slow on purpose; used on tiny instances only.

State tuples are immutable:
  pt    ((edge_count, sender_table, receiver_table), ...)
  st/rt ((pair_table_count, block), ...)
  m     per-block table count
  rest  per block: ((node_label, endpoint_count), ...)
"""

from __future__ import annotations

import numpy as np

EMPTY_STATE = ((), (), (), (), ())


def canonical(pairs) -> tuple:
    """Relabel block ids by first appearance along the edge order."""
    remap: dict = {}
    out = []
    for a, b in pairs:
        for k in (a, b):
            if k not in remap:
                remap[k] = len(remap)
        out.append((remap[a], remap[b]))
    return tuple(out)


def _side_choices(tbls, m, P, tb, gb):
    """All seatings of one new pair table on one side.

    Yields (prior factor, updated tables, updated menu, block, table index).
    """
    denom = P + tb
    for t, (cnt, k) in enumerate(tbls):
        yield cnt / denom, tbls[:t] + ((cnt + 1, k),) + tbls[t + 1:], m, k, t
    new_f = tb / denom
    M = sum(m)
    for k, mk in enumerate(m):
        yield (new_f * mk / (M + gb), tbls + ((1, k),),
               m[:k] + (mk + 1,) + m[k + 1:], k, len(tbls))
    yield new_f * gb / (M + gb), tbls + ((1, len(m)),), m + (1,), len(m), len(tbls)


def _pair_choices(state, hp, n, kind):
    """All seatings of edge number n at the pair level (and below, if new).

    Yields (prior factor, updated state, sender block, receiver block,
    pair table index).
    """
    pt, st, rt, m, rest = state
    denom = n + hp.tau_pair
    for t, (cnt, si, ri) in enumerate(pt):
        pt2 = pt[:t] + ((cnt + 1, si, ri),) + pt[t + 1:]
        yield cnt / denom, (pt2, st, rt, m, rest), st[si][1], rt[ri][1], t
    base_f = hp.tau_pair / denom
    if kind == "mdnd":
        k = len(m)
        new_state = (pt + ((1, len(st), len(rt)),), st + ((1, k),),
                     rt + ((1, k),), m + (2,), rest + ((),))
        yield base_f, new_state, k, k, len(pt)
    else:
        P = len(pt)
        tb, gb = hp.tau_block, hp.gamma_block
        for f_s, st2, m2, ks, si in _side_choices(st, m, P, tb, gb):
            for f_r, rt2, m3, kr, ri in _side_choices(rt, m2, P, tb, gb):
                pt2 = pt + ((1, si, ri),)
                rest2 = rest + ((),) * (len(m3) - len(rest))
                yield (base_f * f_s * f_r, (pt2, st2, rt2, m3, rest2),
                       ks, kr, P)


def _node_choices(rest, k, v, tau_n, beta):
    """All node-table seatings in block k's restaurant emitting node v.

    Yields (probability factor including the emission, updated rest).
    """
    tables = rest[k]
    nd = sum(c for _, c in tables)
    denom = nd + tau_n
    for t, (lab, c) in enumerate(tables):
        if lab == v:
            yield c / denom, rest[:k] + (tables[:t] + ((lab, c + 1),)
                                         + tables[t + 1:],) + rest[k + 1:]
    p_new = (tau_n / denom) * float(beta[v])
    if p_new > 0.0:
        yield p_new, rest[:k] + (tables + ((v, 1),),) + rest[k + 1:]


def canonical_partition(tables) -> tuple:
    """Relabel table ids by first appearance along the edge order."""
    remap: dict = {}
    return tuple(remap.setdefault(t, len(remap)) for t in tables)


def enumerate_posterior(edges, hp, beta, kind="ndmdnd", observable="pairs"):
    """Exact posterior over a seating observable, beta fixed.

    Walks every path of the sequential seating process that emits the
    observed node sequence, accumulating path probabilities grouped by the
    requested observable: "pairs" (canonical per-edge block pairs), "tables"
    (canonical partition of edges into pair tables) or "joint" (both).
    Returns (posterior dict, marginal likelihood of the observations).
    """
    beta = np.asarray(beta, dtype=np.float64)
    edges = [tuple(e) for e in edges]
    tau_n = hp.tau_node
    acc: dict[tuple, float] = {}
    keyers = {
        "pairs": lambda pairs, tabs: canonical(pairs),
        "tables": lambda pairs, tabs: canonical_partition(tabs),
        "joint": lambda pairs, tabs: (canonical(pairs),
                                      canonical_partition(tabs)),
    }
    keyer = keyers[observable]

    def rec(n, prob, state, pairs, tabs):
        if n == len(edges):
            key = keyer(pairs, tabs)
            acc[key] = acc.get(key, 0.0) + prob
            return
        s, r = edges[n]
        for f1, st1, ks, kr, t in _pair_choices(state, hp, n, kind):
            pt, stt, rtt, m, rest = st1
            if len(rest) < len(m):
                rest = rest + ((),) * (len(m) - len(rest))
            for f2, rest2 in _node_choices(rest, ks, s, tau_n, beta):
                for f3, rest3 in _node_choices(rest2, kr, r, tau_n, beta):
                    rec(n + 1, prob * f1 * f2 * f3,
                        (pt, stt, rtt, m, rest3), pairs + ((ks, kr),),
                        tabs + (t,))

    rec(0, 1.0, EMPTY_STATE, (), ())
    total = sum(acc.values())
    if not total > 0.0:
        raise ValueError("observations have zero probability under fixed beta")
    return {k: v / total for k, v in acc.items()}, total


def _predictive(state, k, v, tau_n, beta, extra_n=0, extra_v=0):
    """Node emission probability in block k with optional pending endpoint."""
    nv = float(state.nkv[k, v]) + extra_v
    nd = float(state.nk_dot[k]) + extra_n
    return (nv + tau_n * float(beta[v])) / (nd + tau_n)


def reseat_distribution(state, s, r):
    """Exact conditional over (sender block, receiver block) for one new edge.

    state is a live SeatingState that does NOT contain the edge. Blocks are
    named by their current ids; a sender-side fresh block is -1, a distinct
    receiver-side fresh block is -2 (the pair (-1, -1) means both endpoints
    share one fresh block). Every choice below the pair level is enumerated
    explicitly and marginalized; the dict sums to 1.
    """
    hp = state.hp
    tp, tau_n, beta = hp.tau_pair, hp.tau_node, state.beta
    N = state.num_seated
    dist: dict[tuple[int, int], float] = {}

    def add(key, p):
        dist[key] = dist.get(key, 0.0) + p

    for t in range(state.P):
        a = int(state.st_block[state.pt_s[t]])
        b = int(state.rt_block[state.pt_r[t]])
        p = state.pt_count[t] / (N + tp)
        p *= _predictive(state, a, s, tau_n, beta)
        p *= _predictive(state, b, r, tau_n, beta, extra_n=int(a == b),
                         extra_v=int(a == b and s == r))
        add((a, b), p)
    base = tp / (N + tp)
    if state.kind == "mdnd":
        add((-1, -1), base * float(beta[s])
            * (int(s == r) + tau_n * float(beta[r])) / (1.0 + tau_n))
    else:
        tb, gb = hp.tau_block, hp.gamma_block
        P, M, K = state.P, state.M, state.K
        sden = P + tb
        sender = []  # (prior, block id or -1, menu delta)
        for t in range(state.Ts):
            sender.append((state.st_count[t] / sden, int(state.st_block[t]), 0))
        for k in range(K):
            sender.append(((tb / sden) * state.m[k] / (M + gb), k, 1))
        sender.append(((tb / sden) * gb / (M + gb), -1, 1))
        for p_s, ka, dm in sender:
            if ka == -1:
                emit_s = float(beta[s])
            else:
                emit_s = _predictive(state, ka, s, tau_n, beta)
            p_s *= emit_s
            if not p_s > 0.0:
                continue
            M2 = M + dm

            def emit_r(kb):
                if kb == ka:
                    if ka == -1:
                        return (int(s == r) + tau_n * float(beta[r])) / (1.0 + tau_n)
                    return _predictive(state, kb, r, tau_n, beta, extra_n=1,
                                       extra_v=int(s == r))
                if kb < 0:
                    return float(beta[r])
                return _predictive(state, kb, r, tau_n, beta)

            for t in range(state.Tr):
                kb = int(state.rt_block[t])
                add((ka, kb), base * p_s * (state.rt_count[t] / sden) * emit_r(kb))
            for k in range(K):
                mk = state.m[k] + (dm if k == ka else 0)
                add((ka, k), base * p_s * (tb / sden) * (mk / (M2 + gb)) * emit_r(k))
            if ka == -1:
                add((-1, -1), base * p_s * (tb / sden) * (1.0 / (M2 + gb)) * emit_r(-1))
            fresh = -2 if ka == -1 else -1
            add((ka, fresh), base * p_s * (tb / sden) * (gb / (M2 + gb)) * emit_r(fresh))
    return dist


def brute_edge_score(state, s, r) -> float:
    """Predictive probability of one (s, r) pair by full enumeration."""
    return float(sum(reseat_distribution(state, s, r).values()))
