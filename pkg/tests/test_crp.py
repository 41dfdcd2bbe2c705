import itertools
import math

import numpy as np
import pytest

from crpblocks.crp import (Restaurant, rng_from_seed, sample_categorical,
                           sample_dirichlet)


def test_rng_streams_are_independent_and_reproducible():
    a1 = rng_from_seed(7, "alpha").random(4)
    a2 = rng_from_seed(7, "alpha").random(4)
    b = rng_from_seed(7, "beta").random(4)
    c = rng_from_seed(8, "alpha").random(4)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    assert not np.array_equal(a1, c)


def test_sample_categorical_validates():
    rng = rng_from_seed(0, "cat")
    with pytest.raises(ValueError):
        sample_categorical(np.array([]), rng)
    with pytest.raises(ValueError):
        sample_categorical(np.array([1.0, -0.5]), rng)
    with pytest.raises(ValueError):
        sample_categorical(np.array([0.0, 0.0]), rng)
    with pytest.raises(ValueError):
        sample_categorical(np.array([np.inf, 1.0]), rng)


def test_sample_categorical_frequencies():
    rng = rng_from_seed(1, "cat-freq")
    w = np.array([0.2, 0.0, 0.5, 0.3])
    counts = np.zeros(4)
    n = 40000
    for _ in range(n):
        counts[sample_categorical(w, rng)] += 1
    assert counts[1] == 0  # zero-weight cell never drawn
    np.testing.assert_allclose(counts / n, w, atol=0.01)


def test_sample_dirichlet_moments():
    # Dir(2,2,2,2,2,2): mean 1/6, var = (1/6)(5/6)/11
    rng = rng_from_seed(2, "dir")
    a = np.full(6, 2.0)
    draws = np.array([sample_dirichlet(a, rng) for _ in range(20000)])
    np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(draws.mean(axis=0), 1 / 6, atol=0.003)
    var = (1 / 6) * (5 / 6) / 11.0
    np.testing.assert_allclose(draws.var(axis=0), var, atol=0.003)


def test_sample_dirichlet_validates():
    rng = rng_from_seed(0, "dir-bad")
    with pytest.raises(ValueError):
        sample_dirichlet(np.array([1.0, 0.0]), rng)
    with pytest.raises(ValueError):
        sample_dirichlet(np.array([]), rng)


def test_restaurant_predictive_values():
    r = Restaurant(1.0)
    np.testing.assert_allclose(r.predictive(), [1.0])
    r.seat(None)
    r.seat(0)
    r.seat(None)
    # sizes [2, 1], concentration 1 -> [0.5, 0.25, 0.25]
    np.testing.assert_allclose(r.predictive(), [0.5, 0.25, 0.25])
    assert r.num_customers == 3
    assert r.num_tables == 2


def test_restaurant_seat_count_and_unseat_swap():
    r = Restaurant(2.0)
    t0 = r.seat(None, count=3)
    t1 = r.seat(None)
    assert (t0, t1) == (0, 1)
    empty, moved = r.unseat(0)
    assert not empty and moved is None
    assert r.table_sizes == [2, 1]
    # empty table 0: table 1 swaps into slot 0
    r.unseat(0)
    empty, moved = r.unseat(0)
    assert empty and moved == 1
    assert r.table_sizes == [1]
    empty, moved = r.unseat(0)
    assert empty and moved is None
    assert r.table_sizes == []
    with pytest.raises(IndexError):
        r.unseat(0)


def test_restaurant_expected_tables_matches_harmonic_sum():
    # E[#tables] after n customers at concentration 1 is sum_i 1/i
    n = 100
    target = sum(1.0 / i for i in range(1, n + 1))
    rng = rng_from_seed(3, "harmonic")
    runs = 10000
    total = 0
    for _ in range(runs):
        r = Restaurant(1.0)
        for _ in range(n):
            r.seat_random(rng)
        total += r.num_tables
    assert abs(total / runs - target) < 0.05


def _seating_probability(sequence, conc):
    """Probability of a table-index sequence under sequential CRP seating."""
    sizes = []
    p = 1.0
    for t in sequence:
        n = sum(sizes)
        if t == len(sizes):
            p *= conc / (conc + n)
            sizes.append(1)
        else:
            p *= sizes[t] / (conc + n)
            sizes[t] += 1
    return p


def _partition_of(sequence):
    blocks = {}
    for i, t in enumerate(sequence):
        blocks.setdefault(t, []).append(i)
    return tuple(tuple(b) for b in sorted(blocks.values()))


def test_crp_partition_exchangeability_exhaustive():
    # All orderings of the same partition have equal probability, and the
    # partition probabilities sum to one. Checked exhaustively for n <= 6.
    for conc in (0.5, 1.0, 3.0):
        for n in (3, 5, 6):
            by_partition = {}
            total = 0.0
            for seq in itertools.product(range(n), repeat=n):
                # valid sequences label tables in order of first use
                seen = 0
                ok = True
                for t in seq:
                    if t > seen:
                        ok = False
                        break
                    if t == seen:
                        seen += 1
                if not ok:
                    continue
                p = _seating_probability(seq, conc)
                total += p
                by_partition.setdefault(_partition_of(seq), []).append(p)
            assert abs(total - 1.0) < 1e-12
            for probs in by_partition.values():
                assert max(probs) - min(probs) < 1e-15


def test_ewens_two_customer_split():
    # two customers share a table with probability 1/(1+conc)
    for conc in (0.25, 1.0, 9.0):
        rng = rng_from_seed(5, f"two-{conc}")
        together = 0
        runs = 20000
        for _ in range(runs):
            r = Restaurant(conc)
            r.seat_random(rng)
            r.seat_random(rng)
            together += r.num_tables == 1
        expected = 1.0 / (1.0 + conc)
        assert abs(together / runs - expected) < 0.01 + 2.5 * math.sqrt(
            expected * (1 - expected) / runs)


def test_restaurant_rejects_bad_concentration():
    with pytest.raises(ValueError):
        Restaurant(0.0)
    with pytest.raises(ValueError):
        Restaurant(-1.0)
    r = Restaurant(1.0)
    with pytest.raises(ValueError):
        r.seat(None, count=0)
