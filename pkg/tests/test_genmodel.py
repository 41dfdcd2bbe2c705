import numpy as np
import pytest

from crpblocks.crp import rng_from_seed
from crpblocks.genmodel import (GroundTruth, SparseBlockSpec, gen_mdnd,
                                gen_ndmdnd, gen_sparse_block,
                                make_synthetic_benchmark)
from crpblocks.gibbs import HyperParams
from crpblocks.netcore import degree_stats


def _spec(**kw):
    base = dict(num_nodes=20, num_edges=200, num_blocks=4,
                theta={(0, 0): 0.4, (1, 2): 0.3, (3, 3): 0.3},
                tau=5.0,
                block_of_node=np.repeat(np.arange(4), 5))
    base.update(kw)
    return SparseBlockSpec(**base)


def test_sparse_block_shapes_and_truth_alignment():
    g, truth = gen_sparse_block(_spec(), rng_from_seed(0, "sb"))
    assert g.num_edges == 200
    assert g.num_nodes == 20
    assert truth.sender_blocks.shape == (200,)
    pairs = set(truth.pair_labels())
    assert pairs <= {(0, 0), (1, 2), (3, 3)}


def test_sparse_block_respects_node_supports():
    g, truth = gen_sparse_block(_spec(), rng_from_seed(1, "sb-sup"))
    bon = np.repeat(np.arange(4), 5)
    assert np.array_equal(bon[g.senders], truth.sender_blocks)
    assert np.array_equal(bon[g.receivers], truth.receiver_blocks)


def test_sparse_block_unrestricted_support():
    spec = _spec(block_of_node=None)
    g, truth = gen_sparse_block(spec, rng_from_seed(2, "sb-any"))
    assert truth.block_of_node.tolist() == [-1] * 20
    assert g.num_edges == 200


def test_sparse_block_deterministic():
    g1, _ = gen_sparse_block(_spec(), rng_from_seed(3, "sb-det"))
    g2, _ = gen_sparse_block(_spec(), rng_from_seed(3, "sb-det"))
    assert np.array_equal(g1.senders, g2.senders)
    assert np.array_equal(g1.receivers, g2.receivers)


def test_sparse_block_spec_validation():
    with pytest.raises(ValueError):
        _spec(theta={(0, 0): 0.5})  # does not sum to 1
    with pytest.raises(ValueError):
        _spec(theta={(0, 9): 1.0})  # block out of range
    with pytest.raises(ValueError):
        _spec(tau=0.0)
    with pytest.raises(ValueError):
        _spec(block_of_node=np.zeros(7, dtype=int))


def test_ground_truth_round_trip(tmp_path):
    _, truth = gen_sparse_block(_spec(), rng_from_seed(4, "gt"))
    p = tmp_path / "truth.csv"
    truth.save(p)
    back = GroundTruth.load(p)
    assert np.array_equal(back.sender_blocks, truth.sender_blocks)
    assert np.array_equal(back.receiver_blocks, truth.receiver_blocks)
    assert np.array_equal(back.block_of_node, truth.block_of_node)


def test_benchmark_scale_density_and_degrees():
    for seed in (0, 1, 2):
        g, truth = make_synthetic_benchmark("mixed", seed)
        assert g.num_edges == 719
        assert g.num_nodes == 100
        assert degree_stats(g).min_degree >= 1
        density = len(g.unique_pairs()) / g.num_nodes ** 2
        assert 0.057 <= density <= 0.087
        # planted truth uses both diagonal and off-diagonal pairs
        pairs = set(truth.pair_labels())
        assert any(a == b for a, b in pairs)
        assert any(a != b for a, b in pairs)


def test_benchmark_diagonal_preset():
    g, truth = make_synthetic_benchmark("diagonal", 0)
    assert g.num_edges == 719
    assert all(a == b for a, b in truth.pair_labels())


def test_benchmark_deterministic_and_unknown_preset():
    g1, _ = make_synthetic_benchmark("mixed", 5)
    g2, _ = make_synthetic_benchmark("mixed", 5)
    assert np.array_equal(g1.senders, g2.senders)
    with pytest.raises(ValueError):
        make_synthetic_benchmark("nope", 0)


def test_mdnd_draw_is_diagonal():
    d = gen_mdnd(HyperParams(), 2000, rng_from_seed(0, "mdnd"))
    ks, kr = d.edge_blocks()
    assert np.array_equal(ks, kr)
    # one private block per pair table, serving exactly two tables
    assert d.num_blocks == d.pair_sender_table.shape[0]


def test_ndmdnd_draw_has_off_diagonal_pairs():
    d = gen_ndmdnd(HyperParams(), 2000, rng_from_seed(1, "nd"))
    ks, kr = d.edge_blocks()
    assert (ks != kr).any()
    assert (ks == kr).any()


def test_forward_draw_deterministic():
    d1 = gen_ndmdnd(HyperParams(), 500, rng_from_seed(2, "det"))
    d2 = gen_ndmdnd(HyperParams(), 500, rng_from_seed(2, "det"))
    assert np.array_equal(d1.graph.senders, d2.graph.senders)
    assert np.array_equal(d1.edge_pair_table, d2.edge_pair_table)


def test_forward_draw_concentration_limits():
    # tau_pair -> 0: a single pair table, hence a single block pair
    d = gen_ndmdnd(HyperParams(tau_pair=1e-12), 300, rng_from_seed(3, "lim1"))
    assert d.pair_sender_table.shape[0] == 1
    ks, kr = d.edge_blocks()
    assert len(set(zip(ks.tolist(), kr.tolist()))) == 1
    # gamma_block -> 0: every block table shares the first block
    d2 = gen_ndmdnd(HyperParams(gamma_block=1e-12), 300, rng_from_seed(4, "lim2"))
    assert d2.num_blocks == 1


def test_forward_draw_heavy_tailed_degrees():
    # a homogeneous graph at these sizes has max/mean near 1; the seating
    # process concentrates endpoints on few nodes
    for seed in (0, 1, 2):
        d = gen_ndmdnd(HyperParams(), 30000, rng_from_seed(seed, "tail"))
        deg = degree_stats(d.graph).total
        assert deg.max() / deg.mean() > 5.0
        assert deg.var() / deg.mean() > 50.0


def test_forward_draw_node_growth_is_sublinear():
    track = []
    gen_mdnd(HyperParams(), 10000, rng_from_seed(0, "grow"), track_nodes=track)
    marks = dict(track)
    assert set(marks) == {100, 1000, 10000}
    assert marks[100] < marks[1000] < marks[10000]
    # an order of magnitude more edges yields far less than 10x the nodes
    assert marks[1000] < 4 * marks[100]
    assert marks[10000] < 4 * marks[1000]


def test_chain_save(tmp_path):
    d = gen_ndmdnd(HyperParams(), 50, rng_from_seed(5, "chain"))
    p = tmp_path / "chain.csv"
    d.save_chain(p)
    lines = p.read_text().splitlines()
    assert lines[0].startswith("edge,")
    assert len(lines) == 51
    ks, kr = d.edge_blocks()
    first = lines[1].split(",")
    assert int(first[4]) == ks[0] and int(first[5]) == kr[0]


def test_forward_draw_rejects_empty():
    with pytest.raises(ValueError):
        gen_mdnd(HyperParams(), 0, rng_from_seed(0, "e"))
