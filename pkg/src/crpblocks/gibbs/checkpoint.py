"""Versioned text checkpoints for sampler states.

Only the assignment chain, the base measure, the model inputs and the
generator state are stored; every count cache is rebuilt on load and compared
against the stored tallies, so truncated or edited files are rejected rather
than resurrected. Serialization is canonical JSON (sorted keys, no
whitespace) under a one-line magic header, so saving the same state twice
produces byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from ..netcore import MultiGraph, Vocabulary
from .params import HyperParams
from .state import SeatingState

MAGIC = "NDMDND-CKPT v1"

__all__ = ["MAGIC", "CheckpointError", "save_checkpoint", "load_checkpoint"]


class CheckpointError(ValueError):
    """The file is not a readable checkpoint, or fails verification."""


def _rng_state_out(st):
    if isinstance(st, dict):
        return {k: _rng_state_out(v) for k, v in st.items()}
    if isinstance(st, np.ndarray):
        return st.tolist()
    if isinstance(st, np.integer):
        return int(st)
    return st


def _rng_state_in(st):
    out = dict(st)
    inner = dict(out["state"])
    inner["counter"] = np.array(inner["counter"], dtype=np.uint64)
    inner["key"] = np.array(inner["key"], dtype=np.uint64)
    out["state"] = inner
    out["buffer"] = np.array(out["buffer"], dtype=np.uint64)
    return out


def save_checkpoint(state: SeatingState, path) -> None:
    """Write a fully seated state (and its generator, if attached) to path."""
    if state.num_seated != state.N:
        raise ValueError("refusing to checkpoint a partially seated state")
    hp = state.hp
    payload = {
        "version": 1,
        "kind": state.kind,
        "hyperparams": {
            "tau_pair": float(hp.tau_pair), "tau_block": float(hp.tau_block),
            "gamma_block": float(hp.gamma_block), "tau_node": float(hp.tau_node),
            "gamma_node": float(hp.gamma_node),
        },
        "num_nodes": state.J,
        "labels": state.graph.vocab.labels if state.graph.vocab is not None else None,
        "senders": state.senders.tolist(),
        "receivers": state.receivers.tolist(),
        "beta": state.beta.tolist(),
        "edge_pt": state.edge_pt.tolist(),
        "pt_s": state.pt_s[:state.P].tolist(),
        "pt_r": state.pt_r[:state.P].tolist(),
        "st_block": state.st_block[:state.Ts].tolist(),
        "rt_block": state.rt_block[:state.Tr].tolist(),
        "endpoint_table": state.endpoint_table.tolist(),
        "node_table_labels": [list(lab) for lab in state.nt_label],
        "tallies": {
            "num_seated": state.num_seated, "num_pair_tables": state.P,
            "num_sender_tables": state.Ts, "num_receiver_tables": state.Tr,
            "num_blocks": state.K, "num_block_tables": state.M,
            "num_node_tables": state.num_node_tables,
            "log_seating": state.log_seating, "log_dish": state.log_dish,
        },
        "rng": (_rng_state_out(state.rng.bit_generator.state)
                if state.rng is not None else None),
    }
    text = MAGIC + "\n" + json.dumps(payload, sort_keys=True,
                                     separators=(",", ":")) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise CheckpointError(msg)


def load_checkpoint(path) -> SeatingState:
    """Rebuild a state from a checkpoint file, verifying it throughout.

    The returned state carries the restored generator on state.rng (None if
    the checkpoint was saved without one).
    """
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        body = fh.read()
    _require(header == MAGIC, f"{path}: not a '{MAGIC}' checkpoint")
    try:
        d = json.loads(body)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: corrupt payload: {exc}") from exc
    _require(isinstance(d, dict) and d.get("version") == 1,
             f"{path}: unsupported checkpoint version")
    try:
        hp = HyperParams(**d["hyperparams"])
        kind = d["kind"]
        J = int(d["num_nodes"])
        labels = d["labels"]
        vocab = Vocabulary.from_labels(labels) if labels is not None else None
        if vocab is not None:
            _require(len(vocab) == J, f"{path}: vocabulary size != num_nodes")
        senders = np.asarray(d["senders"], dtype=np.int64)
        receivers = np.asarray(d["receivers"], dtype=np.int64)
        graph = MultiGraph(senders, receivers, num_nodes=J, vocab=vocab)
        beta = np.asarray(d["beta"], dtype=np.float64)
        tall = d["tallies"]
        n = graph.num_edges
        edge_pt = np.asarray(d["edge_pt"], dtype=np.int64)
        pt_s = np.asarray(d["pt_s"], dtype=np.int64)
        pt_r = np.asarray(d["pt_r"], dtype=np.int64)
        st_block = np.asarray(d["st_block"], dtype=np.int64)
        rt_block = np.asarray(d["rt_block"], dtype=np.int64)
        endpoint_table = np.asarray(d["endpoint_table"], dtype=np.int64)
        nt_label = [[int(v) for v in lab] for lab in d["node_table_labels"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint: {exc}") from exc

    P = len(pt_s)
    _require(len(pt_r) == P, f"{path}: pt_s/pt_r length mismatch")
    Ts, Tr, K = len(st_block), len(rt_block), len(nt_label)
    _require(edge_pt.shape == (n,) and n >= 1, f"{path}: edge_pt length mismatch")
    _require(endpoint_table.shape == (2 * n,), f"{path}: endpoint_table length mismatch")
    _require(beta.shape == (J + 1,), f"{path}: beta length mismatch")
    _require(P == 0 or (edge_pt.min() >= 0 and edge_pt.max() < P),
             f"{path}: pair-table id out of range")
    _require(P == 0 or (pt_s.min() >= 0 and pt_s.max() < Ts and
                        pt_r.min() >= 0 and pt_r.max() < Tr),
             f"{path}: side-table id out of range")
    _require((Ts == 0 or (st_block.min() >= 0 and st_block.max() < K)) and
             (Tr == 0 or (rt_block.min() >= 0 and rt_block.max() < K)),
             f"{path}: block id out of range")
    _require(int(endpoint_table.min(initial=0)) >= 0,
             f"{path}: unseated endpoint in checkpoint")
    _require(not (np.any(beta < 0) or abs(beta.sum() - 1.0) > 1e-9),
             f"{path}: beta is not a distribution")

    state = SeatingState(graph, hp, kind, beta=beta)
    state.edge_pt = edge_pt
    state.num_seated = n
    state.P = P
    state.pt_count = np.zeros(max(8, P), dtype=np.int64)
    state.pt_s = np.zeros(max(8, P), dtype=np.int64)
    state.pt_r = np.zeros(max(8, P), dtype=np.int64)
    state.pt_s[:P] = pt_s
    state.pt_r[:P] = pt_r
    state.pt_members = [[] for _ in range(P)]
    for i, t in enumerate(edge_pt.tolist()):
        state.pt_count[t] += 1
        state.pt_members[t].append(i)
    state.Ts, state.Tr = Ts, Tr
    state.st_count = np.zeros(max(8, Ts), dtype=np.int64)
    state.st_block = np.zeros(max(8, Ts), dtype=np.int64)
    state.st_block[:Ts] = st_block
    state.st_members = [[] for _ in range(Ts)]
    state.rt_count = np.zeros(max(8, Tr), dtype=np.int64)
    state.rt_block = np.zeros(max(8, Tr), dtype=np.int64)
    state.rt_block[:Tr] = rt_block
    state.rt_members = [[] for _ in range(Tr)]
    for t in range(P):
        state.st_count[pt_s[t]] += 1
        state.st_members[pt_s[t]].append(t)
        state.rt_count[pt_r[t]] += 1
        state.rt_members[pt_r[t]].append(t)
    state.K = K
    state.M = Ts + Tr
    state.m = np.zeros(max(8, K), dtype=np.int64)
    state.ns = np.zeros(max(8, K), dtype=np.int64)
    state.nr = np.zeros(max(8, K), dtype=np.int64)
    for t in range(Ts):
        state.m[st_block[t]] += 1
        state.ns[st_block[t]] += state.st_count[t]
    for t in range(Tr):
        state.m[rt_block[t]] += 1
        state.nr[rt_block[t]] += state.rt_count[t]
    _require(K == 0 or state.m[:K].min() >= 1, f"{path}: unused block in checkpoint")
    state.nk_dot = np.zeros(max(8, K), dtype=np.float64)
    state.nkv = np.zeros((max(8, K), J + 1), dtype=np.float64)
    state.nt_label = [list(lab) for lab in nt_label]
    state.nt_size = [[0] * len(lab) for lab in nt_label]
    state.nt_members = [[[] for _ in lab] for lab in nt_label]
    state.node_tables = []
    for k in range(K):
        idx: dict[int, list[int]] = {}
        for t, v in enumerate(nt_label[k]):
            _require(0 <= v <= J, f"{path}: node-table label out of range")
            idx.setdefault(v, []).append(t)
        state.node_tables.append(idx)
    state.endpoint_table = endpoint_table
    for i in range(n):
        for eid, v in ((2 * i, int(senders[i])), (2 * i + 1, int(receivers[i]))):
            k = state.endpoint_block(eid)
            t = int(endpoint_table[eid])
            _require(t < len(nt_label[k]) and nt_label[k][t] == v,
                     f"{path}: endpoint {eid} seated at a table for another node")
            state.nt_size[k][t] += 1
            state.nt_members[k][t].append(eid)
            state.nkv[k, v] += 1.0
            state.nk_dot[k] += 1.0
    rho = np.zeros(J, dtype=np.int64)
    for lab in nt_label:
        for v in lab:
            _require(v < J, f"{path}: node table labeled with the unseen atom")
            rho[v] += 1
    state.rho = rho
    state.num_node_tables = int(rho.sum())
    # Adopt the stored incremental log components so a load/save cycle is
    # byte-identical; check_consistency below bounds their drift against a
    # from-scratch recompute.
    try:
        state.log_seating = float(tall["log_seating"])
        state.log_dish = float(tall["log_dish"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed tallies: {exc}") from exc

    derived = {
        "num_seated": n, "num_pair_tables": P, "num_sender_tables": Ts,
        "num_receiver_tables": Tr, "num_blocks": K, "num_block_tables": state.M,
        "num_node_tables": state.num_node_tables,
    }
    for key, val in derived.items():
        _require(int(tall.get(key, -1)) == val,
                 f"{path}: stored tally {key}={tall.get(key)} disagrees with chain ({val})")
    try:
        state.check_consistency()
    except Exception as exc:
        raise CheckpointError(f"{path}: inconsistent checkpoint: {exc}") from exc

    if d.get("rng") is not None:
        gen = np.random.Generator(np.random.Philox())
        try:
            gen.bit_generator.state = _rng_state_in(d["rng"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"{path}: bad generator state: {exc}") from exc
        state.rng = gen
    return state
