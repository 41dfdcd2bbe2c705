"""Edge-exchangeable block models for sparse directed multigraphs.

Generative sampling, collapsed Gibbs inference and held-out link scoring for
a family of network models built from nested table assignments: edges share
pair tables, pair tables share per-role block tables, block tables share a
block menu, and each block pools its endpoints in a node restaurant drawn
against a global base measure. The diagonal variant ties each pair table to
its own block.
"""

from . import evalkit, genmodel, gibbs, netcore
from .crp import Restaurant, rng_from_seed, sample_categorical, sample_dirichlet
from .genmodel import (GroundTruth, NdmdndDraw, SparseBlockSpec, gen_mdnd,
                       gen_ndmdnd, gen_sparse_block, make_synthetic_benchmark)
from .gibbs import (FitConfig, FitResult, HyperParams, SeatingState, Snapshot,
                    fit, load_checkpoint, save_checkpoint)
from .netcore import (EdgeListError, MultiGraph, SplitSpec, Vocabulary,
                      degree_stats, load_edge_list, save_edge_list, split_edges)

__version__ = "0.1.0"

__all__ = [
    "EdgeListError", "FitConfig", "FitResult", "GroundTruth", "HyperParams",
    "MultiGraph", "NdmdndDraw", "Restaurant", "SeatingState", "Snapshot",
    "SparseBlockSpec", "SplitSpec", "Vocabulary", "degree_stats", "evalkit",
    "fit", "gen_mdnd", "gen_ndmdnd", "gen_sparse_block", "genmodel", "gibbs",
    "load_checkpoint", "load_edge_list", "make_synthetic_benchmark", "netcore",
    "rng_from_seed", "sample_categorical", "sample_dirichlet",
    "save_checkpoint", "save_edge_list", "split_edges",
]
