"""Chinese-restaurant seating primitives and the shared RNG contract.

Every stochastic function in this package takes an explicit numpy Generator.
Generators are counter-based (Philox) and derived from a seed plus a stream
name, so independent components of a run draw from independent streams and
any run is reproducible from its seed alone.
"""

from __future__ import annotations

import hashlib

import numpy as np


def rng_from_seed(seed: int, stream: str = "main") -> np.random.Generator:
    """Counter-based generator for a named stream of the given seed."""
    digest = hashlib.sha256(stream.encode()).digest()
    key = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    ss = np.random.SeedSequence(entropy=seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def sample_categorical(weights, rng: np.random.Generator) -> int:
    """Inverse-CDF draw over an unnormalized weight vector.

    Weights must be finite, non-negative, with positive sum.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-d vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and non-negative")
    c = np.cumsum(w)
    total = c[-1]
    if not total > 0:
        raise ValueError("weights must have positive sum")
    u = rng.random() * total
    return int(np.searchsorted(c, u, side="right").clip(0, w.size - 1))


def sample_dirichlet(params, rng: np.random.Generator) -> np.ndarray:
    """Dirichlet draw via normalized gamma variates.

    Requires strictly positive parameters; callers that allow zero-mass
    components must handle them before calling.
    """
    a = np.asarray(params, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("params must be a non-empty 1-d vector")
    if not np.all(a > 0):
        raise ValueError("Dirichlet parameters must be strictly positive")
    x = rng.gamma(a)
    # gamma(shape) for shape >= ~0.01 is positive in float64; renormalize.
    total = x.sum()
    if not total > 0:  # pathological underflow: fall back to the mean
        x = a.copy()
        total = x.sum()
    return x / total


class Restaurant:
    """A single Chinese restaurant: table sizes plus a concentration.

    Table indices are dense. An emptied table is garbage-collected at once by
    swap-removal: the last table is moved into the freed slot, and unseat()
    reports the move so callers can fix their references.
    """

    def __init__(self, concentration: float):
        if not concentration > 0:
            raise ValueError("concentration must be positive")
        self.concentration = float(concentration)
        self.table_sizes: list[int] = []

    @property
    def num_tables(self) -> int:
        return len(self.table_sizes)

    @property
    def num_customers(self) -> int:
        return sum(self.table_sizes)

    def predictive(self) -> np.ndarray:
        """Normalized seating probabilities: existing tables, then a new one."""
        w = np.array(self.table_sizes + [self.concentration], dtype=np.float64)
        return w / w.sum()

    def seat(self, table: int | None, count: int = 1) -> int:
        """Seat `count` customers at `table`, or at a fresh table when None.

        Returns the table index used.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        if table is None:
            self.table_sizes.append(count)
            return self.num_tables - 1
        self.table_sizes[table] += count
        return table

    def seat_random(self, rng: np.random.Generator) -> int:
        """Seat one customer by the predictive; returns the table used."""
        k = sample_categorical(np.array(self.table_sizes + [self.concentration]), rng)
        if k == self.num_tables:
            return self.seat(None)
        return self.seat(k)

    def unseat(self, table: int) -> tuple[bool, int | None]:
        """Remove one customer from `table`.

        Returns (table_became_empty, moved_table). When the table empties it is
        removed immediately; if another table was swapped into its slot,
        moved_table is that table's old index (callers must re-point references
        from moved_table to `table`). moved_table is None when no swap happened.
        """
        if self.table_sizes[table] < 1:
            raise ValueError(f"table {table} is already empty")
        self.table_sizes[table] -= 1
        if self.table_sizes[table] > 0:
            return False, None
        last = self.num_tables - 1
        if table != last:
            self.table_sizes[table] = self.table_sizes[last]
            self.table_sizes.pop()
            return True, last
        self.table_sizes.pop()
        return True, None
