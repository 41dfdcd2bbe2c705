"""Directed multigraph container and edge-list file handling.

Edges are kept as an ordered sequence; the same (sender, receiver) pair may
appear any number of times and repetition is meaningful (it is how weight is
represented internally). Node identities are dense integer ids; the original
string labels live in a Vocabulary sidecar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class EdgeListError(ValueError):
    """Raised for malformed edge-list input; message carries the line number."""


class Vocabulary:
    """Bijection between external node labels and dense integer ids.

    Ids are assigned in first-appearance order, so loading the same file twice
    yields identical ids.
    """

    def __init__(self):
        self._label_to_id: dict[str, int] = {}
        self._id_to_label: list[str] = []

    def __len__(self) -> int:
        return len(self._id_to_label)

    def __contains__(self, label: str) -> bool:
        return label in self._label_to_id

    def add(self, label: str) -> int:
        i = self._label_to_id.get(label)
        if i is None:
            i = len(self._id_to_label)
            self._label_to_id[label] = i
            self._id_to_label.append(label)
        return i

    def id_of(self, label: str) -> int:
        return self._label_to_id[label]

    def label_of(self, node: int) -> str:
        return self._id_to_label[node]

    @property
    def labels(self) -> list[str]:
        return list(self._id_to_label)

    @classmethod
    def from_labels(cls, labels) -> "Vocabulary":
        v = cls()
        for lab in labels:
            v.add(str(lab))
        if len(v) != len(list(labels)):
            raise ValueError("duplicate labels in vocabulary")
        return v

    def save(self, path) -> None:
        with open(path, "w") as fh:
            for i, lab in enumerate(self._id_to_label):
                fh.write(f"{i}\t{lab}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        v = cls()
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise EdgeListError(f"{path}:{lineno}: malformed vocabulary line")
                i = v.add(parts[1])
                if i != int(parts[0]):
                    raise EdgeListError(f"{path}:{lineno}: non-contiguous vocabulary ids")
        return v


@dataclass
class MultiGraph:
    """Ordered directed multigraph over dense node ids 0..num_nodes-1.

    senders/receivers are parallel int arrays, one entry per edge instance.
    Self-loops are permitted. Arrays are marked read-only; treat instances as
    immutable.
    """

    senders: np.ndarray
    receivers: np.ndarray
    num_nodes: int
    vocab: Vocabulary | None = field(default=None, repr=False)

    def __post_init__(self):
        self.senders = np.asarray(self.senders, dtype=np.int64)
        self.receivers = np.asarray(self.receivers, dtype=np.int64)
        if self.senders.shape != self.receivers.shape or self.senders.ndim != 1:
            raise ValueError("senders/receivers must be parallel 1-d arrays")
        if self.num_edges and (self.senders.min() < 0 or
                               max(self.senders.max(), self.receivers.max()) >= self.num_nodes):
            raise ValueError("edge endpoint outside 0..num_nodes-1")
        self.senders.setflags(write=False)
        self.receivers.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return int(self.senders.shape[0])

    def edge(self, i: int) -> tuple[int, int]:
        return int(self.senders[i]), int(self.receivers[i])

    def unique_pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.senders.tolist(), self.receivers.tolist()))

    def label_of(self, node: int) -> str:
        if self.vocab is not None:
            return self.vocab.label_of(node)
        return str(node)


def load_edge_list(path, weight_mode: str = "multiplicity") -> MultiGraph:
    """Read `sender<TAB>receiver[<TAB>weight]` rows into a MultiGraph.

    Comma-separated rows and `#` comment lines are accepted. weight_mode:
      multiplicity -- integer weight w emits w copies of the edge
      round        -- fractional weights are rounded up (ceil) to >= 1 copies
      ignore       -- weight column discarded, one copy per row

    Raises EdgeListError with the offending line number on malformed rows or
    weights that are not >= 1 after rounding.
    """
    if weight_mode not in ("multiplicity", "round", "ignore"):
        raise ValueError(f"unknown weight_mode {weight_mode!r}")
    vocab = Vocabulary()
    senders: list[int] = []
    receivers: list[int] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split(",")
            parts = [p.strip() for p in parts]
            if len(parts) not in (2, 3):
                raise EdgeListError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(parts)}")
            s = vocab.add(parts[0])
            r = vocab.add(parts[1])
            copies = 1
            if len(parts) == 3 and weight_mode != "ignore":
                try:
                    w = float(parts[2])
                except ValueError as exc:
                    raise EdgeListError(f"{path}:{lineno}: bad weight {parts[2]!r}") from exc
                if not math.isfinite(w):
                    raise EdgeListError(f"{path}:{lineno}: bad weight {parts[2]!r}")
                if weight_mode == "multiplicity":
                    if w != int(w):
                        raise EdgeListError(
                            f"{path}:{lineno}: non-integer weight {parts[2]!r} needs weight_mode=round")
                    copies = int(w)
                else:
                    copies = math.ceil(w)
                if copies < 1:
                    raise EdgeListError(f"{path}:{lineno}: weight {parts[2]!r} < 1 after rounding")
            senders.extend([s] * copies)
            receivers.extend([r] * copies)
    return MultiGraph(np.array(senders, dtype=np.int64),
                      np.array(receivers, dtype=np.int64),
                      num_nodes=len(vocab), vocab=vocab)


def save_edge_list(g: MultiGraph, path, aggregate: bool = False) -> None:
    """Write one `sender<TAB>receiver` row per edge instance, in order.

    With aggregate=True, consecutive-order is dropped and one
    `sender<TAB>receiver<TAB>weight` row per distinct pair is written instead
    (first-appearance order).
    """
    with open(path, "w") as fh:
        if aggregate:
            counts: dict[tuple[int, int], int] = {}
            order: list[tuple[int, int]] = []
            for s, r in zip(g.senders.tolist(), g.receivers.tolist()):
                if (s, r) not in counts:
                    counts[(s, r)] = 0
                    order.append((s, r))
                counts[(s, r)] += 1
            for s, r in order:
                fh.write(f"{g.label_of(s)}\t{g.label_of(r)}\t{counts[(s, r)]}\n")
        else:
            for s, r in zip(g.senders.tolist(), g.receivers.tolist()):
                fh.write(f"{g.label_of(s)}\t{g.label_of(r)}\n")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0


def split_edges(g: MultiGraph, spec: SplitSpec) -> tuple[MultiGraph, MultiGraph]:
    """Partition the edge sequence into train/test multigraphs.

    |train| = round(train_fraction * num_edges). Both halves keep the full
    graph's num_nodes and vocabulary, so nodes appearing only in test remain
    representable. Original edge order is preserved within each half.
    """
    if not 0.0 < spec.train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = g.num_edges
    n_train = int(math.floor(spec.train_fraction * n + 0.5))
    if n_train == 0 or n_train == n:
        raise ValueError(f"split of {n} edges at {spec.train_fraction} leaves an empty side")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))
    perm = rng.permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    mk = lambda idx: MultiGraph(g.senders[idx].copy(), g.receivers[idx].copy(),
                                num_nodes=g.num_nodes, vocab=g.vocab)
    return mk(train_idx), mk(test_idx)


@dataclass
class DegreeStats:
    """Per-node degrees counting every edge instance (multiplicity included)."""

    in_degree: np.ndarray
    out_degree: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.in_degree + self.out_degree

    @property
    def min_degree(self) -> int:
        return int(self.total.min())

    @property
    def max_degree(self) -> int:
        return int(self.total.max())


def degree_stats(g: MultiGraph) -> DegreeStats:
    out_deg = np.bincount(g.senders, minlength=g.num_nodes)
    in_deg = np.bincount(g.receivers, minlength=g.num_nodes)
    return DegreeStats(in_degree=in_deg, out_degree=out_deg)
