"""Concentration parameters and fitting schedule."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class HyperParams:
    """Concentrations for the four seating levels plus the base node measure.

    tau_pair    -- pair-table restaurant (customers: edges)
    tau_block   -- sender/receiver block-table restaurants (customers: pair tables)
    gamma_block -- shared block menu (customers: block tables)
    tau_node    -- per-block node restaurants (customers: edge endpoints)
    gamma_node  -- base node restaurant behind the node base measure
    """

    tau_pair: float = 100.0
    tau_block: float = 10.0
    gamma_block: float = 10.0
    tau_node: float = 10.0
    gamma_node: float = 10.0

    def __post_init__(self):
        for name in ("tau_pair", "tau_block", "gamma_block", "tau_node", "gamma_node"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class FitConfig:
    """Schedule for a Gibbs run.

    t1 is the number of edge-resampling steps per epoch; None means one pass
    over a fresh random permutation of all edges. t2 is the number of
    block-table label steps per epoch; None means every live block table once.
    Snapshots are recorded after burn_in, every `thin` epochs.
    """

    epochs: int = 100
    burn_in: int = 0
    thin: int = 1
    t1: int | None = None
    t2: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.burn_in < 0 or self.burn_in >= self.epochs:
            raise ValueError("burn_in must lie in [0, epochs)")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.t1 is not None and self.t1 < 1:
            raise ValueError("t1 must be >= 1 when given")
        if self.t2 is not None and self.t2 < 0:
            raise ValueError("t2 must be >= 0 when given")
