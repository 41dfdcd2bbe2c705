"""Mutable seating state for collapsed Gibbs inference.

The chain for one edge runs pair table -> (sender block table, receiver block
table) -> block labels -> per-block node tables. All four seating levels are
kept explicitly together with redundant count caches used by the samplers:

  pt_count[t]   edges at pair table t          nkv[k, v]  endpoints of node v
  st_count[t]   pair tables at sender table t             in block k's restaurant
  rt_count[t]   pair tables at receiver table t nk_dot[k] total endpoints in k
  m[k]          block tables labeled k          rho[v]    node tables labeled v
  ns[k]/nr[k]   pair tables under sender/receiver tables labeled k

Empty tables and blocks are garbage-collected immediately by swap-removal, so
all live ids are dense. A joint log-score (chain + observed endpoints given
beta) is maintained incrementally; log_joint() recomputes it from scratch.

The diagonal model ("mdnd") uses the same structures with every pair table
owning one sender table, one receiver table and one private block; the block
menu and side restaurants then carry no probability and contribute nothing to
the log-score.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ..netcore import MultiGraph
from .params import HyperParams

BETA_FLOOR = 1e-300

_LOG = math.log


class ConsistencyError(RuntimeError):
    """A cached count disagrees with the assignment chain. Not recoverable."""


def _grow(arr: np.ndarray, need: int) -> np.ndarray:
    if need <= arr.shape[0]:
        return arr
    new_len = max(need, 2 * arr.shape[0], 8)
    if arr.ndim == 1:
        out = np.zeros(new_len, dtype=arr.dtype)
        out[:arr.shape[0]] = arr
    else:
        out = np.zeros((new_len, arr.shape[1]), dtype=arr.dtype)
        out[:arr.shape[0], :] = arr
    return out


def _crp_log(conc: float, sizes, n: int) -> float:
    """Log-probability of one restaurant's seating, any arrival order."""
    if n == 0:
        return 0.0
    sizes = np.asarray(sizes, dtype=np.float64)
    return (sizes.shape[0] * _LOG(conc) + float(gammaln(sizes).sum())
            - float(gammaln(conc + n) - gammaln(conc)))


class Snapshot:
    """Immutable summary of a state, sufficient for evaluation.

    Pair tables are aggregated by their (sender block, receiver block) pair:
    pair_a/pair_b/pair_w give the distinct pairs and their total edge counts.
    edge_pairs holds each training edge's block pair. train_seen marks nodes
    occurring in the training edges; absent nodes carry no beta mass and are
    scored through the unseen atom beta[J].
    """

    __slots__ = ("epoch", "kind", "hp", "num_nodes", "num_edges", "beta",
                 "nkv", "nk_dot", "m", "ns", "nr", "num_block_tables",
                 "num_pair_tables", "pair_a", "pair_b", "pair_w",
                 "edge_pairs", "train_seen")

    def __init__(self, **kw):
        for name in self.__slots__:
            val = kw[name]
            if isinstance(val, np.ndarray):
                val.setflags(write=False)
            object.__setattr__(self, name, val)

    def __setattr__(self, *a):
        raise AttributeError("snapshots are immutable")

    @property
    def num_blocks(self) -> int:
        return int(self.m.shape[0])


def snapshot_to_dict(snap: Snapshot) -> dict:
    """JSON-ready representation of a snapshot; inverse of snapshot_from_dict."""
    return {
        "epoch": int(snap.epoch),
        "kind": snap.kind,
        "hyperparams": {
            "tau_pair": float(snap.hp.tau_pair),
            "tau_block": float(snap.hp.tau_block),
            "gamma_block": float(snap.hp.gamma_block),
            "tau_node": float(snap.hp.tau_node),
            "gamma_node": float(snap.hp.gamma_node),
        },
        "num_nodes": int(snap.num_nodes),
        "num_edges": int(snap.num_edges),
        "beta": snap.beta.tolist(),
        "nkv": snap.nkv.tolist(),
        "nk_dot": snap.nk_dot.tolist(),
        "m": snap.m.tolist(),
        "ns": snap.ns.tolist(),
        "nr": snap.nr.tolist(),
        "num_block_tables": int(snap.num_block_tables),
        "num_pair_tables": int(snap.num_pair_tables),
        "pair_a": snap.pair_a.tolist(),
        "pair_b": snap.pair_b.tolist(),
        "pair_w": snap.pair_w.tolist(),
        "edge_pairs": snap.edge_pairs.tolist(),
        "train_seen": [int(b) for b in snap.train_seen.tolist()],
    }


def snapshot_from_dict(d: dict) -> Snapshot:
    J = int(d["num_nodes"])
    nkv = np.asarray(d["nkv"], dtype=np.float64).reshape(-1, J + 1)
    edge_pairs = np.asarray(d["edge_pairs"], dtype=np.int64).reshape(-1, 2)
    return Snapshot(
        epoch=int(d["epoch"]), kind=d["kind"], hp=HyperParams(**d["hyperparams"]),
        num_nodes=J, num_edges=int(d["num_edges"]),
        beta=np.asarray(d["beta"], dtype=np.float64),
        nkv=nkv, nk_dot=np.asarray(d["nk_dot"], dtype=np.float64),
        m=np.asarray(d["m"], dtype=np.int64),
        ns=np.asarray(d["ns"], dtype=np.int64),
        nr=np.asarray(d["nr"], dtype=np.int64),
        num_block_tables=int(d["num_block_tables"]),
        num_pair_tables=int(d["num_pair_tables"]),
        pair_a=np.asarray(d["pair_a"], dtype=np.int64),
        pair_b=np.asarray(d["pair_b"], dtype=np.int64),
        pair_w=np.asarray(d["pair_w"], dtype=np.float64),
        edge_pairs=edge_pairs,
        train_seen=np.asarray(d["train_seen"], dtype=bool),
    )


class SeatingState:
    """Assignment chain plus caches for a fixed training multigraph."""

    def __init__(self, graph: MultiGraph, hp: HyperParams, kind: str = "ndmdnd",
                 beta: np.ndarray | None = None):
        if kind not in ("ndmdnd", "mdnd"):
            raise ValueError(f"kind must be 'ndmdnd' or 'mdnd', got {kind!r}")
        self.graph = graph
        self.hp = hp
        self.kind = kind
        self.J = graph.num_nodes
        self.N = graph.num_edges
        self.senders = graph.senders
        self.receivers = graph.receivers
        seen = np.zeros(self.J, dtype=bool)
        seen[self.senders] = True
        seen[self.receivers] = True
        self.train_seen = seen

        if beta is None:
            beta = np.full(self.J + 1, 1.0 / (self.J + 1))
        self.beta = np.asarray(beta, dtype=np.float64).copy()
        if self.beta.shape != (self.J + 1,):
            raise ValueError("beta must have num_nodes + 1 entries")

        n = self.N
        self.edge_pt = np.full(n, -1, dtype=np.int64)
        self.num_seated = 0

        self.P = 0
        self.pt_count = np.zeros(8, dtype=np.int64)
        self.pt_s = np.zeros(8, dtype=np.int64)
        self.pt_r = np.zeros(8, dtype=np.int64)
        self.pt_members: list[list[int]] = []

        self.Ts = 0
        self.st_count = np.zeros(8, dtype=np.int64)
        self.st_block = np.zeros(8, dtype=np.int64)
        self.st_members: list[list[int]] = []
        self.Tr = 0
        self.rt_count = np.zeros(8, dtype=np.int64)
        self.rt_block = np.zeros(8, dtype=np.int64)
        self.rt_members: list[list[int]] = []

        self.K = 0
        self.M = 0
        self.m = np.zeros(8, dtype=np.int64)
        self.ns = np.zeros(8, dtype=np.int64)
        self.nr = np.zeros(8, dtype=np.int64)
        self.nk_dot = np.zeros(8, dtype=np.float64)
        self.nkv = np.zeros((8, self.J + 1), dtype=np.float64)
        self.nt_label: list[list[int]] = []
        self.nt_size: list[list[int]] = []
        self.nt_members: list[list[list[int]]] = []
        self.node_tables: list[dict[int, list[int]]] = []

        self.endpoint_table = np.full(2 * n, -1, dtype=np.int64)
        self.rho = np.zeros(self.J, dtype=np.int64)
        self.num_node_tables = 0

        self.log_seating = 0.0
        self.log_dish = 0.0
        self.rng: np.random.Generator | None = None

    # -- trace helpers ----------------------------------------------------

    @property
    def num_blocks(self) -> int:
        return self.K

    @property
    def num_pair_tables(self) -> int:
        return self.P

    @property
    def num_block_tables(self) -> int:
        return self.Ts + self.Tr

    @property
    def log_score(self) -> float:
        return self.log_seating + self.log_dish

    # -- pair level -------------------------------------------------------

    def seat_edge_existing(self, i: int, t: int) -> None:
        self.log_seating += _LOG(self.pt_count[t]) - _LOG(self.hp.tau_pair + self.num_seated)
        self.pt_count[t] += 1
        self.num_seated += 1
        self.pt_members[t].append(i)
        self.edge_pt[i] = t

    def create_pair_table(self, i: int, st: int, rt: int) -> int:
        """Open a pair table for edge i, seated at side tables st/rt."""
        self.log_seating += _LOG(self.hp.tau_pair) - _LOG(self.hp.tau_pair + self.num_seated)
        t = self.P
        self.pt_count = _grow(self.pt_count, t + 1)
        self.pt_s = _grow(self.pt_s, t + 1)
        self.pt_r = _grow(self.pt_r, t + 1)
        self.pt_count[t] = 1
        self.pt_s[t] = st
        self.pt_r[t] = rt
        self.pt_members.append([i])
        self.edge_pt[i] = t
        self.num_seated += 1
        self._side_attach(0, st, t)
        self._side_attach(1, rt, t)
        self.P += 1
        return t

    def unseat_edge(self, i: int) -> None:
        """Remove edge i from all four levels, collecting empty tables."""
        t = int(self.edge_pt[i])
        if t < 0:
            raise ValueError(f"edge {i} is not seated")
        ks = int(self.st_block[self.pt_s[t]])
        kr = int(self.rt_block[self.pt_r[t]])
        self._node_unseat(ks, int(self.senders[i]), 2 * i)
        self._node_unseat(kr, int(self.receivers[i]), 2 * i + 1)
        self.pt_members[t].remove(i)
        self.edge_pt[i] = -1
        z = int(self.pt_count[t])
        tp = self.hp.tau_pair
        if z > 1:
            self.log_seating -= _LOG(z - 1) - _LOG(tp + self.num_seated - 1)
        else:
            self.log_seating -= _LOG(tp) - _LOG(tp + self.num_seated - 1)
        self.pt_count[t] = z - 1
        self.num_seated -= 1
        if z == 1:
            self._pair_remove(t)

    def _pair_remove(self, t: int) -> None:
        self._side_unseat(0, int(self.pt_s[t]), t)
        self._side_unseat(1, int(self.pt_r[t]), t)
        last = self.P - 1
        if t != last:
            self.pt_count[t] = self.pt_count[last]
            self.pt_s[t] = self.pt_s[last]
            self.pt_r[t] = self.pt_r[last]
            self.pt_members[t] = self.pt_members[last]
            for e in self.pt_members[t]:
                self.edge_pt[e] = t
            lst = self.st_members[self.pt_s[t]]
            lst[lst.index(last)] = t
            lst = self.rt_members[self.pt_r[t]]
            lst[lst.index(last)] = t
        self.pt_members.pop()
        self.P -= 1

    # -- side (block table) level ----------------------------------------

    def _side_arrays(self, side: int):
        if side == 0:
            return self.st_count, self.st_block, self.st_members
        return self.rt_count, self.rt_block, self.rt_members

    def create_side_table(self, side: int, k: int) -> int:
        """Open a block table on the given side, labeled with block k.

        The table starts with no customers; the caller attaches the pair
        table afterwards (via create_pair_table). The block-menu seat is
        recorded here.
        """
        self._menu_seat(k)
        count, block, members = self._side_arrays(side)
        t = self.Ts if side == 0 else self.Tr
        count = _grow(count, t + 1)
        block = _grow(block, t + 1)
        count[t] = 0
        block[t] = k
        members.append([])
        if side == 0:
            self.st_count, self.st_block = count, block
            self.Ts += 1
        else:
            self.rt_count, self.rt_block = count, block
            self.Tr += 1
        return t

    def _side_attach(self, side: int, t: int, pair_table: int) -> None:
        count, block, members = self._side_arrays(side)
        if self.kind == "ndmdnd":
            tb = self.hp.tau_block
            z = int(count[t])
            if z > 0:
                self.log_seating += _LOG(z) - _LOG(tb + self.P)
            else:
                self.log_seating += _LOG(tb) - _LOG(tb + self.P)
        count[t] += 1
        self.ns[block[t]] += 1 if side == 0 else 0
        self.nr[block[t]] += 1 if side == 1 else 0
        members[t].append(pair_table)

    def _side_unseat(self, side: int, t: int, pair_table: int) -> None:
        count, block, members = self._side_arrays(side)
        members[t].remove(pair_table)
        z = int(count[t])
        if self.kind == "ndmdnd":
            tb = self.hp.tau_block
            if z > 1:
                self.log_seating -= _LOG(z - 1) - _LOG(tb + self.P - 1)
            else:
                self.log_seating -= _LOG(tb) - _LOG(tb + self.P - 1)
        count[t] = z - 1
        if side == 0:
            self.ns[block[t]] -= 1
        else:
            self.nr[block[t]] -= 1
        if z == 1:
            k = int(block[t])
            dead = self._menu_unseat(k)
            last = (self.Ts if side == 0 else self.Tr) - 1
            if t != last:
                count[t] = count[last]
                block[t] = block[last]
                members[t] = members[last]
                refs = self.pt_s if side == 0 else self.pt_r
                for ptid in members[t]:
                    refs[ptid] = t
            members.pop()
            if side == 0:
                self.Ts -= 1
            else:
                self.Tr -= 1
            if dead:
                self._block_remove(k)

    # -- block menu level -------------------------------------------------

    def create_block(self) -> int:
        k = self.K
        self.m = _grow(self.m, k + 1)
        self.ns = _grow(self.ns, k + 1)
        self.nr = _grow(self.nr, k + 1)
        self.nk_dot = _grow(self.nk_dot, k + 1)
        self.nkv = _grow(self.nkv, k + 1)
        self.m[k] = 0
        self.ns[k] = 0
        self.nr[k] = 0
        self.nk_dot[k] = 0.0
        self.nkv[k, :] = 0.0
        self.nt_label.append([])
        self.nt_size.append([])
        self.nt_members.append([])
        self.node_tables.append({})
        self.K += 1
        return k

    def _menu_seat(self, k: int) -> None:
        z = int(self.m[k])
        if self.kind == "ndmdnd":
            gb = self.hp.gamma_block
            if z > 0:
                self.log_seating += _LOG(z) - _LOG(gb + self.M)
            else:
                self.log_seating += _LOG(gb) - _LOG(gb + self.M)
        self.m[k] = z + 1
        self.M += 1

    def _menu_unseat(self, k: int) -> bool:
        """Remove one block-table customer from block k; True if k emptied.

        The caller is responsible for _block_remove when True (deferred so a
        label resample can keep the empty block as a zero-weight candidate).
        """
        z = int(self.m[k])
        if self.kind == "ndmdnd":
            gb = self.hp.gamma_block
            if z > 1:
                self.log_seating -= _LOG(z - 1) - _LOG(gb + self.M - 1)
            else:
                self.log_seating -= _LOG(gb) - _LOG(gb + self.M - 1)
        self.m[k] = z - 1
        self.M -= 1
        return z == 1

    def _block_remove(self, k: int) -> None:
        if self.nk_dot[k] != 0 or self.nt_label[k] or self.node_tables[k]:
            raise ConsistencyError(f"removing block {k} with a non-empty node restaurant")
        last = self.K - 1
        if k != last:
            self.m[k] = self.m[last]
            self.ns[k] = self.ns[last]
            self.nr[k] = self.nr[last]
            self.nk_dot[k] = self.nk_dot[last]
            self.nkv[k, :] = self.nkv[last, :]
            self.nt_label[k] = self.nt_label[last]
            self.nt_size[k] = self.nt_size[last]
            self.nt_members[k] = self.nt_members[last]
            self.node_tables[k] = self.node_tables[last]
            self.st_block[:self.Ts][self.st_block[:self.Ts] == last] = k
            self.rt_block[:self.Tr][self.rt_block[:self.Tr] == last] = k
        self.nt_label.pop()
        self.nt_size.pop()
        self.nt_members.pop()
        self.node_tables.pop()
        self.K -= 1

    # -- node level -------------------------------------------------------

    def node_predictive(self, k: int | None, v: int, minus: int | None = None) -> float:
        """Predictive mass of node v in block k's restaurant.

        k=None gives the fresh-block case (the base measure). minus, when
        given, is an endpoint id whose seat is excluded from the counts.
        """
        tau = self.hp.tau_node
        bv = float(self.beta[v])
        if k is None:
            return bv
        nv = float(self.nkv[k, v])
        nd = float(self.nk_dot[k])
        if minus is not None and self.endpoint_table[minus] >= 0:
            i = minus >> 1
            node = int(self.senders[i]) if minus % 2 == 0 else int(self.receivers[i])
            t = int(self.edge_pt[i])
            kk = int(self.st_block[self.pt_s[t]]) if minus % 2 == 0 else int(self.rt_block[self.pt_r[t]])
            if kk == k:
                nd -= 1.0
                if node == v:
                    nv -= 1.0
        return (nv + tau * bv) / (nd + tau)

    def seat_node_sampled(self, k: int, v: int, eid: int, rng: np.random.Generator) -> None:
        """Seat one endpoint in block k's restaurant by the table conditional.

        Tables are scanned in id order so the draw depends only on the
        current assignment structure, not on construction history; this keeps
        resumed chains in lockstep with uninterrupted ones.
        """
        lst = self.node_tables[k].get(v)
        w_new = self.hp.tau_node * float(self.beta[v])
        if lst:
            lst = sorted(lst)
            total = w_new
            for t in lst:
                total += self.nt_size[k][t]
            u = rng.random() * total
            acc = 0.0
            for t in lst:
                acc += self.nt_size[k][t]
                if u < acc:
                    self._node_seat(k, v, eid, t)
                    return
        elif not w_new > 0.0:
            raise ConsistencyError(f"node {v} has zero base mass and no open table")
        self._node_seat(k, v, eid, None)

    def _node_seat(self, k: int, v: int, eid: int, table: int | None) -> None:
        tau = self.hp.tau_node
        nd = self.nk_dot[k]
        if table is None:
            self.log_seating += _LOG(tau) - _LOG(tau + nd)
            self.log_dish += _LOG(self.beta[v])
            table = len(self.nt_label[k])
            self.nt_label[k].append(v)
            self.nt_size[k].append(1)
            self.nt_members[k].append([eid])
            self.node_tables[k].setdefault(v, []).append(table)
            self.rho[v] += 1
            self.num_node_tables += 1
        else:
            self.log_seating += _LOG(self.nt_size[k][table]) - _LOG(tau + nd)
            self.nt_size[k][table] += 1
            self.nt_members[k][table].append(eid)
        self.endpoint_table[eid] = table
        self.nkv[k, v] += 1.0
        self.nk_dot[k] += 1.0

    def _node_unseat(self, k: int, v: int, eid: int) -> None:
        t = int(self.endpoint_table[eid])
        if t < 0:
            raise ValueError(f"endpoint {eid} is not seated")
        self.nt_members[k][t].remove(eid)
        self.endpoint_table[eid] = -1
        tau = self.hp.tau_node
        z = self.nt_size[k][t]
        if z > 1:
            self.log_seating -= _LOG(z - 1) - _LOG(tau + self.nk_dot[k] - 1)
        else:
            self.log_seating -= _LOG(tau) - _LOG(tau + self.nk_dot[k] - 1)
        self.nt_size[k][t] = z - 1
        self.nkv[k, v] -= 1.0
        self.nk_dot[k] -= 1.0
        if z == 1:
            self.log_dish -= _LOG(self.beta[v])
            self.rho[v] -= 1
            self.num_node_tables -= 1
            lst = self.node_tables[k][v]
            lst.remove(t)
            if not lst:
                del self.node_tables[k][v]
            last = len(self.nt_label[k]) - 1
            if t != last:
                mv = self.nt_label[k][last]
                self.nt_label[k][t] = mv
                self.nt_size[k][t] = self.nt_size[k][last]
                self.nt_members[k][t] = self.nt_members[k][last]
                for e2 in self.nt_members[k][t]:
                    self.endpoint_table[e2] = t
                ltl = self.node_tables[k][mv]
                ltl[ltl.index(last)] = t
            self.nt_label[k].pop()
            self.nt_size[k].pop()
            self.nt_members[k].pop()

    def endpoint_block(self, eid: int) -> int:
        i = eid >> 1
        t = int(self.edge_pt[i])
        if eid % 2 == 0:
            return int(self.st_block[self.pt_s[t]])
        return int(self.rt_block[self.pt_r[t]])

    # -- scoring ----------------------------------------------------------

    def log_joint(self) -> tuple[float, float]:
        """From-scratch (seating, dish) log components given current beta."""
        hp = self.hp
        seating = _crp_log(hp.tau_pair, self.pt_count[:self.P], self.num_seated)
        if self.kind == "ndmdnd":
            seating += _crp_log(hp.tau_block, self.st_count[:self.Ts], self.P)
            seating += _crp_log(hp.tau_block, self.rt_count[:self.Tr], self.P)
            seating += _crp_log(hp.gamma_block, self.m[:self.K], self.M)
        for k in range(self.K):
            seating += _crp_log(hp.tau_node, self.nt_size[k], int(self.nk_dot[k]))
        dish = 0.0
        for v in np.flatnonzero(self.rho):
            dish += self.rho[v] * _LOG(self.beta[v])
        return seating, dish

    def recompute_log_dish(self) -> None:
        _, self.log_dish = self.log_joint()

    def snapshot(self, epoch: int = 0) -> Snapshot:
        K, P = self.K, self.P
        a = self.st_block[self.pt_s[:P]].astype(np.int64)
        b = self.rt_block[self.pt_r[:P]].astype(np.int64)
        key = a * (K + 1) + b
        uniq, inv = np.unique(key, return_inverse=True)
        w = np.bincount(inv, weights=self.pt_count[:P].astype(np.float64))
        if self.N:
            seated = self.edge_pt
            ks = self.st_block[self.pt_s[seated]].astype(np.int64)
            kr = self.rt_block[self.pt_r[seated]].astype(np.int64)
            edge_pairs = np.stack([ks, kr], axis=1)
        else:
            edge_pairs = np.zeros((0, 2), dtype=np.int64)
        return Snapshot(
            epoch=epoch, kind=self.kind, hp=self.hp, num_nodes=self.J,
            num_edges=self.num_seated, beta=self.beta.copy(),
            nkv=self.nkv[:K].copy(), nk_dot=self.nk_dot[:K].copy(),
            m=self.m[:K].copy(), ns=self.ns[:K].copy(), nr=self.nr[:K].copy(),
            num_block_tables=self.M, num_pair_tables=P,
            pair_a=(uniq // (K + 1)).astype(np.int64),
            pair_b=(uniq % (K + 1)).astype(np.int64),
            pair_w=w, edge_pairs=edge_pairs, train_seen=self.train_seen.copy(),
        )

    # -- verification -----------------------------------------------------

    def check_consistency(self) -> None:
        """Recompute every cache from the assignment chain; raise on mismatch."""
        n = self.N
        if self.num_seated != int((self.edge_pt >= 0).sum()):
            raise ConsistencyError("num_seated mismatch")
        seated = np.flatnonzero(self.edge_pt >= 0)
        pt_count = np.bincount(self.edge_pt[seated], minlength=self.P)
        if pt_count.shape[0] != self.P or self.P and pt_count.min() < 1:
            raise ConsistencyError("empty or out-of-range pair table")
        if not np.array_equal(pt_count, self.pt_count[:self.P]):
            raise ConsistencyError("pt_count mismatch")
        for t in range(self.P):
            if sorted(self.pt_members[t]) != sorted(np.flatnonzero(self.edge_pt == t).tolist()):
                raise ConsistencyError(f"pt_members mismatch at {t}")
        for side, (T, count, block, members, refs) in enumerate((
                (self.Ts, self.st_count, self.st_block, self.st_members, self.pt_s),
                (self.Tr, self.rt_count, self.rt_block, self.rt_members, self.pt_r))):
            sc = np.bincount(refs[:self.P], minlength=T) if self.P else np.zeros(T, dtype=int)
            if sc.shape[0] != T or (T and sc.min() < 1):
                raise ConsistencyError(f"side {side}: empty or out-of-range table")
            if not np.array_equal(sc, count[:T]):
                raise ConsistencyError(f"side {side}: count mismatch")
            for t in range(T):
                if sorted(members[t]) != sorted(np.flatnonzero(refs[:self.P] == t).tolist()):
                    raise ConsistencyError(f"side {side}: members mismatch at {t}")
        labels = np.concatenate([self.st_block[:self.Ts], self.rt_block[:self.Tr]])
        mm = np.bincount(labels, minlength=self.K) if labels.size else np.zeros(self.K, dtype=int)
        if mm.shape[0] != self.K or (self.K and mm.min() < 1):
            raise ConsistencyError("empty or out-of-range block")
        if not np.array_equal(mm, self.m[:self.K]):
            raise ConsistencyError("m mismatch")
        if self.M != self.Ts + self.Tr:
            raise ConsistencyError("M mismatch")
        ns = np.zeros(self.K, dtype=np.int64)
        nr = np.zeros(self.K, dtype=np.int64)
        for t in range(self.Ts):
            ns[self.st_block[t]] += self.st_count[t]
        for t in range(self.Tr):
            nr[self.rt_block[t]] += self.rt_count[t]
        if not (np.array_equal(ns, self.ns[:self.K]) and np.array_equal(nr, self.nr[:self.K])):
            raise ConsistencyError("ns/nr mismatch")
        nkv = np.zeros((self.K, self.J + 1))
        rho = np.zeros(self.J, dtype=np.int64)
        nt_size = [[0] * len(self.nt_label[k]) for k in range(self.K)]
        for i in seated:
            for eid, v in ((2 * i, int(self.senders[i])), (2 * i + 1, int(self.receivers[i]))):
                k = self.endpoint_block(eid)
                t = int(self.endpoint_table[eid])
                if t < 0 or t >= len(self.nt_label[k]):
                    raise ConsistencyError(f"endpoint {eid}: bad node table")
                if self.nt_label[k][t] != v:
                    raise ConsistencyError(f"endpoint {eid}: node table label mismatch")
                if eid not in self.nt_members[k][t]:
                    raise ConsistencyError(f"endpoint {eid}: missing from nt_members")
                nt_size[k][t] += 1
                nkv[k, v] += 1
        for k in range(self.K):
            if nt_size[k] != self.nt_size[k]:
                raise ConsistencyError(f"nt_size mismatch in block {k}")
            if any(z < 1 for z in nt_size[k]):
                raise ConsistencyError(f"empty node table in block {k}")
            for t, v in enumerate(self.nt_label[k]):
                rho[v] += 1
                if t not in self.node_tables[k].get(v, []):
                    raise ConsistencyError(f"node_tables index missing {k}/{t}")
            for v, lst in self.node_tables[k].items():
                if sorted(lst) != sorted(t for t, lab in enumerate(self.nt_label[k]) if lab == v):
                    raise ConsistencyError(f"node_tables mismatch {k}/{v}")
        if not np.array_equal(nkv, self.nkv[:self.K]):
            raise ConsistencyError("nkv mismatch")
        if not np.array_equal(nkv.sum(axis=1), self.nk_dot[:self.K]):
            raise ConsistencyError("nk_dot mismatch")
        if not np.array_equal(rho, self.rho):
            raise ConsistencyError("rho mismatch")
        if self.num_node_tables != int(rho.sum()):
            raise ConsistencyError("num_node_tables mismatch")
        seating, dish = self.log_joint()
        if abs(seating - self.log_seating) > 1e-8 * max(1.0, abs(seating)):
            raise ConsistencyError(f"log_seating drift: {self.log_seating} vs {seating}")
        if abs(dish - self.log_dish) > 1e-8 * max(1.0, abs(dish)):
            raise ConsistencyError(f"log_dish drift: {self.log_dish} vs {dish}")
        if self.kind == "mdnd":
            pa = self.st_block[self.pt_s[:self.P]]
            pb = self.rt_block[self.pt_r[:self.P]]
            if not np.array_equal(pa, pb):
                raise ConsistencyError("diagonal model has an off-diagonal pair table")
