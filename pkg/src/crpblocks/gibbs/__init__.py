from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .params import FitConfig, HyperParams
from .sampler import (FitResult, fit, initialize, resample_beta,
                      resample_block_tables, resample_edge)
from .state import (ConsistencyError, SeatingState, Snapshot,
                    snapshot_from_dict, snapshot_to_dict)

__all__ = [
    "CheckpointError", "ConsistencyError", "FitConfig", "FitResult",
    "HyperParams", "SeatingState", "Snapshot", "fit", "initialize",
    "load_checkpoint", "resample_beta", "resample_block_tables",
    "resample_edge", "save_checkpoint", "snapshot_from_dict",
    "snapshot_to_dict",
]
